//! Text snapshot of the grid.
//!
//! 51 lines of 51 characters, top line `y = 50`:
//!
//! | char | patch |
//! |------|-------|
//! | `B`  | blood |
//! | `#`  | intact barrier |
//! | `=`  | damaged barrier |
//! | `.`  | myelin above 2/3 of `init_mye` |
//! | `:`  | myelin in (1/3, 2/3] |
//! | `,`  | myelin in (0, 1/3] |
//! | `X`  | no myelin (unrecoverable) |
//!
//! With energy annotation a blank line follows, then `id,breed,x,y,energy`
//! and one CSV line per live agent in id order.

use alloc::string::String;
use core::fmt::Write as _;

use crate::engine::WorldState;
use crate::world::{PatchState, Zone, GRID_EXTENT};

pub const LEGEND: [char; 7] = ['B', '#', '=', '.', ':', ',', 'X'];

pub fn patch_char(p: &PatchState, init_mye: f64) -> char {
    match p.zone {
        Zone::Blood => 'B',
        Zone::Barrier if p.is_intact_barrier() => '#',
        Zone::Barrier => '=',
        Zone::WhiteMatter => {
            let m = p.myelin;
            if m <= 0.0 {
                'X'
            } else if m * 3.0 > 2.0 * init_mye {
                '.'
            } else if m * 3.0 > init_mye {
                ':'
            } else {
                ','
            }
        }
    }
}

pub fn write_snapshot(world: &WorldState, annotate_energy: bool) -> String {
    let mut out = String::with_capacity((GRID_EXTENT + 1) * GRID_EXTENT);
    let init = world.params.init_mye;
    for y in (0..GRID_EXTENT).rev() {
        for x in 0..GRID_EXTENT {
            out.push(patch_char(world.grid.get(x, y), init));
        }
        out.push('\n');
    }
    if annotate_energy {
        out.push('\n');
        out.push_str("id,breed,x,y,energy\n");
        for a in world.population.iter() {
            let _ = writeln!(
                out,
                "{},{},{:.3},{:.3},{}",
                a.id.0,
                a.breed.name(),
                a.pos.x,
                a.pos.y,
                a.energy
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;
    use crate::engine::init_run;
    use crate::world::Barrier;
    use alloc::vec::Vec;

    fn rows(s: &str) -> Vec<&str> {
        s.lines().take(GRID_EXTENT).collect()
    }

    #[test]
    fn fresh_layout() {
        let w = init_run(preset(1).unwrap()).unwrap();
        let s = write_snapshot(&w, false);
        let r = rows(&s);
        assert_eq!(s.lines().count(), 51);
        for y in 0..51 {
            let line = r[50 - y];
            assert_eq!(line.chars().count(), 51);
            let expect = match y {
                15..=34 => '.',
                13 | 14 | 35 | 36 => '#',
                _ => 'B',
            };
            assert!(line.chars().all(|c| c == expect), "row y={y}: {line}");
        }
    }

    #[test]
    fn damaged_cell_and_myelin_bands() {
        let mut w = init_run(preset(1).unwrap()).unwrap();
        w.grid.get_mut(25, 13).barrier = Some(Barrier::Damaged(50));
        w.grid.get_mut(0, 20).myelin = 66.0;
        w.grid.get_mut(1, 20).myelin = 20.0;
        w.grid.get_mut(2, 20).myelin = 0.0;
        w.grid.get_mut(3, 20).myelin = 67.0;
        let s = write_snapshot(&w, false);
        let r = rows(&s);
        assert_eq!(r[50 - 13].chars().nth(25), Some('='));
        assert_eq!(r[50 - 13].chars().filter(|&c| c == '=').count(), 1);
        assert_eq!(&r[50 - 20][..5], ":,X..");
        assert!(s.chars().all(|c| c == '\n' || LEGEND.contains(&c)));
    }

    #[test]
    fn annotation_lists_agents() {
        let w = init_run(preset(6).unwrap()).unwrap();
        let s = write_snapshot(&w, true);
        let overlay: Vec<&str> = s.lines().skip(52).collect();
        assert_eq!(overlay[0], "id,breed,x,y,energy");
        assert_eq!(overlay.len() - 1, 250);
        assert!(overlay[1].starts_with("0,treg_rest,"));
    }
}
