//! Agent storage with a per-patch spatial index.
//!
//! Agents live in a vector kept in ascending id order. Removal only marks a
//! slot dead, so slot indices stay stable until [`Population::compact`];
//! new agents are appended, which preserves id order because ids only grow.
//! Each patch keeps the slots of the live agents inside it, which turns
//! radius queries into a scan over the patches the disc can touch.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{AgentId, AgentState, Breed};
use crate::world::{Position, GRID_EXTENT, PATCH_COUNT};

/// Slot index into the population vector.
pub type Slot = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    agents: Vec<AgentState>,
    alive: Vec<bool>,
    /// `buckets[breed * PATCH_COUNT + patch]`: live slots of that breed there.
    buckets: Vec<Vec<u32>>,
    /// Slots that were ever of each breed since the last compaction; may hold
    /// dead or converted entries, filtered on use.
    members: [Vec<u32>; Breed::COUNT],
    counts: [usize; Breed::COUNT],
    next_id: u64,
}

impl Default for Population {
    fn default() -> Self {
        Self::new()
    }
}

impl Population {
    pub fn new() -> Self {
        Self {
            agents: Vec::new(),
            alive: Vec::new(),
            buckets: vec![Vec::new(); PATCH_COUNT * Breed::COUNT],
            members: Default::default(),
            counts: [0; Breed::COUNT],
            next_id: 0,
        }
    }

    /// Adds an agent with the next id. `pos` must be inside the grid.
    pub fn spawn(&mut self, breed: Breed, pos: Position, heading: f64, energy: f64) -> AgentId {
        let id = AgentId(self.next_id);
        self.next_id += 1;
        let slot = self.agents.len();
        self.agents.push(AgentState {
            id,
            breed,
            pos,
            heading,
            energy,
            pursuing: false,
        });
        self.alive.push(true);
        self.buckets[bucket(breed, pos.patch_index())].push(slot as u32);
        self.members[breed.index()].push(slot as u32);
        self.counts[breed.index()] += 1;
        id
    }

    /// Number of slots, dead or alive. Slots `0..len()` are in id order.
    pub fn len_slots(&self) -> usize {
        self.agents.len()
    }

    pub fn live_count(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, breed: Breed) -> usize {
        self.counts[breed.index()]
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    #[inline]
    pub fn is_alive(&self, slot: Slot) -> bool {
        self.alive[slot]
    }

    #[inline]
    pub fn get(&self, slot: Slot) -> &AgentState {
        &self.agents[slot]
    }

    /// Live agents in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &AgentState> + '_ {
        self.agents
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(ag, _)| ag)
    }

    pub fn slot_of(&self, id: AgentId) -> Option<Slot> {
        let slot = self.agents.binary_search_by_key(&id, |a| a.id).ok()?;
        self.alive[slot].then_some(slot)
    }

    pub fn set_energy(&mut self, slot: Slot, energy: f64) {
        self.agents[slot].energy = energy;
    }

    pub fn set_heading(&mut self, slot: Slot, heading: f64, pursuing: bool) {
        let a = &mut self.agents[slot];
        a.heading = heading;
        a.pursuing = pursuing;
    }

    pub fn set_breed(&mut self, slot: Slot, breed: Breed) {
        let old = self.agents[slot].breed;
        if old == breed {
            return;
        }
        let patch = self.agents[slot].pos.patch_index();
        self.unbucket(bucket(old, patch), slot);
        self.buckets[bucket(breed, patch)].push(slot as u32);
        self.members[breed.index()].push(slot as u32);
        self.counts[old.index()] -= 1;
        self.counts[breed.index()] += 1;
        self.agents[slot].breed = breed;
    }

    pub fn relocate(&mut self, slot: Slot, pos: Position) {
        let a = &self.agents[slot];
        let from = a.pos.patch_index();
        let to = pos.patch_index();
        if from != to {
            let b = a.breed;
            self.unbucket(bucket(b, from), slot);
            self.buckets[bucket(b, to)].push(slot as u32);
        }
        self.agents[slot].pos = pos;
    }

    pub fn remove(&mut self, slot: Slot) {
        if !self.alive[slot] {
            return;
        }
        self.alive[slot] = false;
        let a = &self.agents[slot];
        let (breed, patch) = (a.breed, a.pos.patch_index());
        self.counts[breed.index()] -= 1;
        self.unbucket(bucket(breed, patch), slot);
    }

    fn unbucket(&mut self, index: usize, slot: Slot) {
        let b = &mut self.buckets[index];
        if let Some(i) = b.iter().position(|&s| s as usize == slot) {
            b.swap_remove(i);
        }
    }

    /// Drops dead slots and rebuilds the index. Invalidates slot numbers.
    pub fn compact(&mut self) {
        if self.alive.iter().all(|&a| a) {
            return;
        }
        let mut keep = self.alive.iter();
        self.agents.retain(|_| *keep.next().unwrap_or(&false));
        self.alive.clear();
        self.alive.resize(self.agents.len(), true);
        for b in &mut self.buckets {
            b.clear();
        }
        for m in &mut self.members {
            m.clear();
        }
        for (slot, a) in self.agents.iter().enumerate() {
            self.buckets[bucket(a.breed, a.pos.patch_index())].push(slot as u32);
            self.members[a.breed.index()].push(slot as u32);
        }
    }

    /// Live agents on the patch with this index.
    pub fn count_on_patch(&self, patch_index: usize) -> usize {
        Breed::ALL
            .iter()
            .map(|&b| self.buckets[bucket(b, patch_index)].len())
            .sum()
    }

    fn count_set(&self, set: BreedSet) -> usize {
        set.iter().map(|b| self.counts[b.index()]).sum()
    }

    /// Slots of live agents within Euclidean distance `r` of `center`,
    /// whose breed is in `set`, other than `exclude`; ascending (= id order).
    pub fn in_radius(
        &self,
        center: &Position,
        r: f64,
        exclude: Option<Slot>,
        set: BreedSet,
    ) -> Vec<Slot> {
        let mut out = Vec::new();
        if r.is_nan() || r < 0.0 || self.count_set(set) == 0 {
            return out;
        }
        let r2 = r * r;
        let (x0, x1) = patch_span(center.x - r, center.x + r);
        let (y0, y1) = patch_span(center.y - r, center.y + r);
        for b in set.iter() {
            for py in y0..=y1 {
                for px in x0..=x1 {
                    for &s in &self.buckets[bucket(b, py * GRID_EXTENT + px)] {
                        let s = s as usize;
                        if Some(s) != exclude && self.agents[s].pos.distance_sq(center) <= r2 {
                            out.push(s);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Number of live agents within `r` of `center` whose breed is in `set`.
    pub fn count_in_radius(&self, center: &Position, r: f64, set: BreedSet) -> usize {
        if r.is_nan() || r < 0.0 || self.count_set(set) == 0 {
            return 0;
        }
        let r2 = r * r;
        let (x0, x1) = patch_span(center.x - r, center.x + r);
        let (y0, y1) = patch_span(center.y - r, center.y + r);
        let mut n = 0;
        for b in set.iter() {
            for py in y0..=y1 {
                for px in x0..=x1 {
                    n += self.buckets[bucket(b, py * GRID_EXTENT + px)]
                        .iter()
                        .filter(|&&s| self.agents[s as usize].pos.distance_sq(center) <= r2)
                        .count();
                }
            }
        }
        n
    }

    /// Closest live agent whose breed is in `set` (ties to the lower id).
    ///
    /// Sparse targets are scanned directly; otherwise the search walks
    /// expanding square rings of patches around `center`.
    pub fn nearest(&self, center: &Position, exclude: Option<Slot>, set: BreedSet) -> Option<Slot> {
        let total = self.count_set(set);
        if total == 0 {
            return None;
        }
        let mut best: Option<(f64, Slot)> = None;
        let consider = |s: Slot, best: &mut Option<(f64, Slot)>| {
            if Some(s) == exclude {
                return;
            }
            let d2 = self.agents[s].pos.distance_sq(center);
            let better = match *best {
                None => true,
                Some((bd, bs)) => d2 < bd || (d2 == bd && s < bs),
            };
            if better {
                *best = Some((d2, s));
            }
        };

        if total <= SPARSE_SCAN {
            for b in set.iter() {
                for &s in &self.members[b.index()] {
                    let s = s as usize;
                    if self.alive[s] && self.agents[s].breed == b {
                        consider(s, &mut best);
                    }
                }
            }
            return best.map(|(_, s)| s);
        }

        let (cx, cy) = center.patch();
        let (cx, cy) = (cx as isize, cy as isize);
        let n = GRID_EXTENT as isize;
        for k in 0..n {
            let mut visit = |px: isize, py: isize| {
                if px < 0 || py < 0 || px >= n || py >= n {
                    return;
                }
                let patch = (py * n + px) as usize;
                for b in set.iter() {
                    for &s in &self.buckets[bucket(b, patch)] {
                        consider(s as usize, &mut best);
                    }
                }
            };
            if k == 0 {
                visit(cx, cy);
            } else {
                for dx in -k..=k {
                    visit(cx + dx, cy - k);
                    visit(cx + dx, cy + k);
                }
                for dy in (-k + 1)..k {
                    visit(cx - k, cy + dy);
                    visit(cx + k, cy + dy);
                }
            }
            // Anything in ring k+1 or beyond is farther than k.
            if let Some((bd, _)) = best {
                let kf = k as f64;
                if bd <= kf * kf {
                    break;
                }
            }
        }
        best.map(|(_, s)| s)
    }
}

/// Below this many candidates `nearest` skips the ring search.
const SPARSE_SCAN: usize = 48;

#[inline]
fn bucket(breed: Breed, patch: usize) -> usize {
    breed.index() * PATCH_COUNT + patch
}

/// Set of breeds for spatial queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BreedSet(u8);

impl BreedSet {
    pub const ALL: BreedSet = BreedSet((1 << Breed::COUNT) - 1);
    pub const TREGS: BreedSet = BreedSet::of(&[Breed::TregResting, Breed::TregActive]);
    pub const RESTING: BreedSet = BreedSet::of(&[Breed::TregResting, Breed::TeffResting]);

    pub const fn of(breeds: &[Breed]) -> BreedSet {
        let mut bits = 0u8;
        let mut i = 0;
        while i < breeds.len() {
            bits |= 1 << breeds[i] as u8;
            i += 1;
        }
        BreedSet(bits)
    }

    pub const fn single(b: Breed) -> BreedSet {
        BreedSet(1 << b as u8)
    }

    pub const fn contains(self, b: Breed) -> bool {
        self.0 & (1 << b as u8) != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Breed> {
        Breed::ALL.into_iter().filter(move |&b| self.contains(b))
    }
}

fn patch_span(lo: f64, hi: f64) -> (usize, usize) {
    let max = (GRID_EXTENT - 1) as f64;
    let lo = libm::floor(lo).clamp(0.0, max) as usize;
    let hi = libm::floor(hi).clamp(0.0, max) as usize;
    (lo, hi)
}
