//! Zoned patch grid and movement geometry.
//!
//! Rows `y = 0..=12` and `37..=50` are blood, `13..=14` and `35..=36` are the
//! two barrier bands, and `15..=34` is white matter. The grid is bounded:
//! leaving it counts as a bounce, exactly like hitting an intact barrier.

use alloc::vec::Vec;

use crate::config::SimParams;
use crate::dynamics::AgentId;
use crate::engine::WorldState;
use crate::population::BreedSet;

pub const GRID_EXTENT: usize = 51;
pub const PATCH_COUNT: usize = GRID_EXTENT * GRID_EXTENT;

const WM_ROWS: core::ops::RangeInclusive<usize> = 15..=34;

/// Number of white-matter patches (20 rows of 51).
pub const WM_TOTAL: usize = GRID_EXTENT * (*WM_ROWS.end() - *WM_ROWS.start() + 1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zone {
    Blood,
    Barrier,
    WhiteMatter,
}

/// Zone of row `y`, or `None` outside the grid.
pub fn classify_zone(y: i64) -> Option<Zone> {
    Some(match y {
        0..=12 | 37..=50 => Zone::Blood,
        13..=14 | 35..=36 => Zone::Barrier,
        15..=34 => Zone::WhiteMatter,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Barrier {
    Intact,
    /// Open for this many more recovery steps.
    Damaged(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchState {
    pub zone: Zone,
    /// Always 0 outside white matter.
    pub myelin: f64,
    /// `Some` exactly for barrier patches.
    pub barrier: Option<Barrier>,
}

impl PatchState {
    pub fn is_intact_barrier(&self) -> bool {
        self.barrier == Some(Barrier::Intact)
    }

    pub fn is_damaged_barrier(&self) -> bool {
        matches!(self.barrier, Some(Barrier::Damaged(_)))
    }
}

/// Continuous coordinates; the containing patch is `(floor(x), floor(y))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Column and row of the containing patch. Only valid for in-grid positions.
    #[inline]
    pub fn patch(&self) -> (usize, usize) {
        (self.x as usize, self.y as usize)
    }

    #[inline]
    pub fn patch_index(&self) -> usize {
        let (x, y) = self.patch();
        y * GRID_EXTENT + x
    }

    #[inline]
    pub fn distance_sq(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn in_bounds(&self) -> bool {
        let e = GRID_EXTENT as f64;
        self.x >= 0.0 && self.x < e && self.y >= 0.0 && self.y < e
    }
}

/// The 51×51 patch array, row-major with `index = y * 51 + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    patches: Vec<PatchState>,
    /// Indices of every non-barrier patch, ascending. Used for placement.
    open: Vec<u16>,
    /// Barrier patches opened during the current tick; their countdown
    /// starts with the next recovery phase.
    fresh: Vec<u16>,
}

impl Grid {
    /// Fresh grid: intact barriers, white matter at `init_mye`.
    pub fn new(params: &SimParams) -> Self {
        let mut patches = Vec::with_capacity(PATCH_COUNT);
        let mut open = Vec::new();
        for y in 0..GRID_EXTENT {
            // rows are in range by construction
            let zone = classify_zone(y as i64).unwrap_or(Zone::Blood);
            for x in 0..GRID_EXTENT {
                let (myelin, barrier) = match zone {
                    Zone::WhiteMatter => (params.init_mye, None),
                    Zone::Barrier => (0.0, Some(Barrier::Intact)),
                    Zone::Blood => (0.0, None),
                };
                if zone != Zone::Barrier {
                    open.push((y * GRID_EXTENT + x) as u16);
                }
                patches.push(PatchState {
                    zone,
                    myelin,
                    barrier,
                });
            }
        }
        Self {
            patches,
            open,
            fresh: Vec::new(),
        }
    }

    pub fn patches(&self) -> &[PatchState] {
        &self.patches
    }

    pub fn patches_mut(&mut self) -> &mut [PatchState] {
        &mut self.patches
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &PatchState {
        &self.patches[y * GRID_EXTENT + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut PatchState {
        &mut self.patches[y * GRID_EXTENT + x]
    }

    #[inline]
    pub fn at(&self, pos: &Position) -> &PatchState {
        &self.patches[pos.patch_index()]
    }

    #[inline]
    pub fn at_mut(&mut self, pos: &Position) -> &mut PatchState {
        &mut self.patches[pos.patch_index()]
    }

    /// Opens the intact barrier patch under `pos` for `countdown` full ticks.
    /// Returns false (and changes nothing) if it is not an intact barrier.
    pub fn open_barrier(&mut self, pos: &Position, countdown: u32) -> bool {
        let index = pos.patch_index();
        let patch = &mut self.patches[index];
        if !patch.is_intact_barrier() {
            return false;
        }
        patch.barrier = Some(Barrier::Damaged(countdown));
        self.fresh.push(index as u16);
        true
    }

    /// One countdown step for every open barrier patch except those opened
    /// since the previous step.
    pub fn recover_barriers(&mut self) {
        for (i, patch) in self.patches.iter_mut().enumerate() {
            if let Some(Barrier::Damaged(c)) = patch.barrier {
                if self.fresh.contains(&(i as u16)) {
                    continue;
                }
                patch.barrier = Some(if c > 1 {
                    Barrier::Damaged(c - 1)
                } else {
                    Barrier::Intact
                });
            }
        }
        self.fresh.clear();
    }

    /// Patch indices where agents may be placed (everything but barrier).
    pub fn open_cells(&self) -> &[u16] {
        &self.open
    }

    pub fn count_zone(&self, zone: Zone) -> usize {
        self.patches.iter().filter(|p| p.zone == zone).count()
    }
}

/// Same as [`Grid::new`].
pub fn build_grid(params: &SimParams) -> Grid {
    Grid::new(params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MoveOutcome {
    Moved(Position),
    /// The agent stays put; the caller must draw it a fresh heading.
    Bounced,
}

/// Unit step along `heading` (degrees; 0° = +x, 90° = +y).
pub fn step_target(pos: &Position, heading: f64) -> Position {
    let rad = heading.to_radians();
    Position {
        x: pos.x + libm::cos(rad),
        y: pos.y + libm::sin(rad),
    }
}

/// One-patch step with bounce semantics.
///
/// Leaving the grid always bounces. Entering an intact barrier patch bounces
/// when `constrained` (every breed except cytokines). Damaged barrier patches
/// are passable.
pub fn attempt_move(grid: &Grid, pos: &Position, heading: f64, constrained: bool) -> MoveOutcome {
    let target = step_target(pos, heading);
    if !target.in_bounds() || (constrained && grid.at(&target).is_intact_barrier()) {
        MoveOutcome::Bounced
    } else {
        MoveOutcome::Moved(target)
    }
}

/// Ids of live agents within Euclidean distance `r` of `center` whose breed
/// is in `set`, other than `exclude`, in ascending id order.
pub fn agents_in_radius(
    world: &WorldState,
    center: &Position,
    r: f64,
    exclude: Option<AgentId>,
    set: BreedSet,
) -> Vec<AgentId> {
    let pop = &world.population;
    let skip = exclude.and_then(|id| pop.slot_of(id));
    pop.in_radius(center, r, skip, set)
        .into_iter()
        .map(|s| pop.get(s).id)
        .collect()
}
