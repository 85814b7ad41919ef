//! Per-breed behaviour: activation by viruses, myelin attack and effector
//! duplication, regulator policing and division, cytokine damage to the
//! barrier, myelin regrowth, barrier recovery, influx and energy death.
//!
//! Functions taking a [`Slot`] act on one agent and are what the scheduler
//! in [`crate::engine`] calls; the `*_phase` functions apply the same rule to
//! every eligible agent in id order without moving anyone.

use alloc::vec::Vec;

use crate::config::SimParams;
use crate::engine::WorldState;
use crate::population::{BreedSet, Slot};
use crate::world::{attempt_move, Grid, MoveOutcome, Position, Zone, GRID_EXTENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Breed {
    TregResting,
    TregActive,
    TeffResting,
    TeffActive,
    Virus,
    Cytokine,
}

impl Breed {
    pub const COUNT: usize = 6;
    pub const ALL: [Breed; Breed::COUNT] = [
        Breed::TregResting,
        Breed::TregActive,
        Breed::TeffResting,
        Breed::TeffActive,
        Breed::Virus,
        Breed::Cytokine,
    ];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn is_treg(self) -> bool {
        matches!(self, Breed::TregResting | Breed::TregActive)
    }

    pub const fn is_teff(self) -> bool {
        matches!(self, Breed::TeffResting | Breed::TeffActive)
    }

    pub const fn is_resting(self) -> bool {
        matches!(self, Breed::TregResting | Breed::TeffResting)
    }

    /// Everything but cytokines bounces off intact barrier patches.
    pub const fn bounce_constrained(self) -> bool {
        !matches!(self, Breed::Cytokine)
    }

    /// The state a virus contact moves this breed to, if any.
    pub const fn activated(self) -> Option<Breed> {
        match self {
            Breed::TregResting => Some(Breed::TregActive),
            Breed::TeffResting => Some(Breed::TeffActive),
            _ => None,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Breed::TregResting => "treg_rest",
            Breed::TregActive => "treg_act",
            Breed::TeffResting => "teff_rest",
            Breed::TeffActive => "teff_act",
            Breed::Virus => "virus",
            Breed::Cytokine => "cytokine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub breed: Breed,
    pub pos: Position,
    /// Degrees in `[0, 360)`; 0° is +x, 90° is +y.
    pub heading: f64,
    pub energy: f64,
    /// Set when an active Treg steered toward a distant effector; the next
    /// move follows `heading` instead of drawing a random one.
    pub pursuing: bool,
}

/// Per-tick tally of everything that changes the population.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub influx_events: u32,
    pub influx_agents: u32,
    pub treg_activations: u32,
    pub teff_activations: u32,
    pub attacks: u32,
    pub cytokines_created: u32,
    pub teff_duplications: u32,
    pub kills: u32,
    pub treg_kill_births: u32,
    pub treg_divisions: u32,
    pub barrier_hits: u32,
    pub virus_contact_deaths: u32,
    pub energy_deaths: u32,
}

impl EventCounts {
    /// Net population change implied by these events.
    pub fn net_population_change(&self) -> i64 {
        let born = self.influx_agents
            + self.cytokines_created
            + self.teff_duplications
            + self.treg_kill_births
            + self.treg_divisions;
        let died = self.kills + self.barrier_hits + self.virus_contact_deaths + self.energy_deaths;
        i64::from(born) - i64::from(died)
    }

    pub fn accumulate(&mut self, o: &EventCounts) {
        self.influx_events += o.influx_events;
        self.influx_agents += o.influx_agents;
        self.treg_activations += o.treg_activations;
        self.teff_activations += o.teff_activations;
        self.attacks += o.attacks;
        self.cytokines_created += o.cytokines_created;
        self.teff_duplications += o.teff_duplications;
        self.kills += o.kills;
        self.treg_kill_births += o.treg_kill_births;
        self.treg_divisions += o.treg_divisions;
        self.barrier_hits += o.barrier_hits;
        self.virus_contact_deaths += o.virus_contact_deaths;
        self.energy_deaths += o.energy_deaths;
    }
}

/// Bernoulli probability that an active effector duplicates after eating.
///
/// `dupl · (m/m0)^h1 · k^h2 / (t^h2 + k^h2)` with `m` the patch myelin,
/// `m0 = init_mye`, `k = mean_treg` and `t` the Tregs within `treg_radius`,
/// clamped to `[0, 1]`.
pub fn teff_duplication_probability(myelin: f64, params: &SimParams, treg_here: usize) -> f64 {
    let myelin = myelin.clamp(0.0, params.init_mye);
    let supply = libm::pow(myelin / params.init_mye, params.hill1);
    let k = libm::pow(params.mean_treg, params.hill2);
    let t = libm::pow(treg_here as f64, params.hill2);
    let suppression = k / (t + k);
    let p = params.effector_dupl() * supply * suppression;
    if p.is_nan() {
        0.0
    } else {
        p.clamp(0.0, 1.0)
    }
}

/// Uniform point inside a random non-barrier patch.
pub(crate) fn random_open_position(world: &mut WorldState) -> Position {
    let cells = world.grid.open_cells();
    let cell = cells[world.rng.below(cells.len())] as usize;
    let (cx, cy) = ((cell % GRID_EXTENT) as f64, (cell / GRID_EXTENT) as f64);
    let x = inside(cx, world.rng.uniform());
    let y = inside(cy, world.rng.uniform());
    Position::new(x, y)
}

// cx + u can round up to cx + 1 for u close to 1.
fn inside(base: f64, u: f64) -> f64 {
    let v = base + u;
    if v >= base + 1.0 {
        f64::from_bits((base + 1.0).to_bits() - 1)
    } else {
        v
    }
}

/// Spawns `n` agents of `breed` at random open positions with random headings.
pub(crate) fn scatter(world: &mut WorldState, breed: Breed, n: u32, energy: f64) {
    for _ in 0..n {
        let pos = random_open_position(world);
        let heading = world.rng.heading();
        world.population.spawn(breed, pos, heading, energy);
    }
}

/// Random walk step with bounce. Consumes one heading draw, plus one more
/// on a bounce. A pursuing agent keeps its heading for this step.
pub fn move_agent(world: &mut WorldState, slot: Slot) {
    let a = *world.population.get(slot);
    let heading = if a.pursuing {
        a.heading
    } else {
        world.rng.heading()
    };
    match attempt_move(&world.grid, &a.pos, heading, a.breed.bounce_constrained()) {
        MoveOutcome::Moved(pos) => {
            world.population.relocate(slot, pos);
            world.population.set_heading(slot, heading, false);
        }
        MoveOutcome::Bounced => {
            let fresh = world.rng.heading();
            world.population.set_heading(slot, fresh, false);
        }
    }
}

/// Three independent influx draws (Treg, Teff, virus), each spawning a full
/// initial cohort of that breed.
pub fn influx_phase(world: &mut WorldState) {
    let p = world.params;
    let cohorts = [
        (Breed::TregResting, p.init_treg_n, p.treg_life),
        (Breed::TeffResting, p.init_teff_n, p.teff_life),
        (Breed::Virus, p.init_virus_n, p.v_energy),
    ];
    for (breed, n, energy) in cohorts {
        if world.rng.bernoulli(p.influx_prob) {
            world.events.influx_events += 1;
            world.events.influx_agents += n;
            scatter(world, breed, n, energy);
        }
    }
}

/// An active effector eats the myelin under it, emits cytokines and may
/// duplicate. No-op unless it stands on white matter with myelin left.
pub fn teff_attack(world: &mut WorldState, slot: Slot) {
    let a = *world.population.get(slot);
    debug_assert_eq!(a.breed, Breed::TeffActive);
    let p = world.params;
    let patch = world.grid.at_mut(&a.pos);
    if patch.zone != Zone::WhiteMatter || patch.myelin <= 0.0 {
        return;
    }
    patch.myelin = (patch.myelin - p.ate_mye).max(0.0);
    let remaining = patch.myelin;
    world.events.attacks += 1;

    let energy = a.energy + p.ate_mye;
    world.population.set_energy(slot, energy);

    for _ in 0..p.cytokine_n {
        world
            .population
            .spawn(Breed::Cytokine, a.pos, a.heading, p.cytokine_energy);
    }
    world.events.cytokines_created += p.cytokine_n;

    let treg_here = world
        .population
        .count_in_radius(&a.pos, p.treg_radius, BreedSet::TREGS);
    let prob = teff_duplication_probability(remaining, &p, treg_here);
    if world.rng.bernoulli(prob) {
        world
            .population
            .spawn(Breed::TeffActive, a.pos, a.heading, energy);
        world.events.teff_duplications += 1;
    }
}

pub fn teff_attack_phase(world: &mut WorldState) {
    for slot in 0..world.population.len_slots() {
        if world.population.is_alive(slot) && world.population.get(slot).breed == Breed::TeffActive
        {
            teff_attack(world, slot);
        }
    }
}

/// A cytokine standing on an intact barrier patch opens it and dies.
pub fn cytokine_hit(world: &mut WorldState, slot: Slot) {
    let pos = world.population.get(slot).pos;
    if world.grid.open_barrier(&pos, world.params.bbb_countdown) {
        world.population.remove(slot);
        world.events.barrier_hits += 1;
    }
}

pub fn cytokine_phase(world: &mut WorldState) {
    for slot in 0..world.population.len_slots() {
        if world.population.is_alive(slot) && world.population.get(slot).breed == Breed::Cytokine {
            cytokine_hit(world, slot);
        }
    }
}

/// An active Treg kills the nearest active effector within `treg_radius`,
/// gains energy and duplicates. With none in range it steers toward the
/// nearest active effector on the grid, if any.
pub fn treg_police(world: &mut WorldState, slot: Slot) {
    let p = world.params;
    if p.disable_treg {
        return;
    }
    let me = *world.population.get(slot);
    debug_assert_eq!(me.breed, Breed::TregActive);
    let is_target = BreedSet::single(Breed::TeffActive);
    let in_range = world
        .population
        .in_radius(&me.pos, p.treg_radius, Some(slot), is_target);
    let victim = in_range.iter().copied().min_by(|&a, &b| {
        let da = world.population.get(a).pos.distance_sq(&me.pos);
        let db = world.population.get(b).pos.distance_sq(&me.pos);
        da.total_cmp(&db).then(a.cmp(&b))
    });
    if let Some(victim) = victim {
        world.population.remove(victim);
        world.events.kills += 1;
        let energy = me.energy + p.kill_energy_gain;
        world.population.set_energy(slot, energy);
        world
            .population
            .spawn(Breed::TregActive, me.pos, me.heading, energy);
        world.events.treg_kill_births += 1;
    } else if world.population.count(Breed::TeffActive) > 0 {
        if let Some(target) = world.population.nearest(&me.pos, Some(slot), is_target) {
            let t = world.population.get(target).pos;
            let heading = heading_toward(&me.pos, &t);
            world.population.set_heading(slot, heading, true);
        }
    }
}

pub fn treg_police_phase(world: &mut WorldState) {
    for slot in 0..world.population.len_slots() {
        if world.population.is_alive(slot) && world.population.get(slot).breed == Breed::TregActive
        {
            treg_police(world, slot);
        }
    }
}

fn heading_toward(from: &Position, to: &Position) -> f64 {
    let deg = libm::atan2(to.y - from.y, to.x - from.x).to_degrees();
    let h = if deg < 0.0 { deg + 360.0 } else { deg };
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// Treg division: one percentage roll, then a crowding check against
/// `patch_density` (the dividing cell counts itself). On success the energy
/// is split evenly with a same-state daughter.
pub fn treg_reproduce(world: &mut WorldState, slot: Slot) {
    let a = *world.population.get(slot);
    debug_assert!(a.breed.is_treg());
    let roll = world.rng.uniform() * 100.0;
    if roll >= world.params.treg_repro_pct {
        return;
    }
    if world.population.count_on_patch(a.pos.patch_index()) >= world.params.patch_density as usize {
        return;
    }
    let half = a.energy / 2.0;
    world.population.set_energy(slot, half);
    world.population.spawn(a.breed, a.pos, a.heading, half);
    world.events.treg_divisions += 1;
}

/// A virus tries to activate every resting T-cell within `v_radius`
/// (one `mimicry` roll each, in id order) and dies if any activation took.
pub fn virus_contact(world: &mut WorldState, slot: Slot) {
    let v = *world.population.get(slot);
    debug_assert_eq!(v.breed, Breed::Virus);
    let targets: Vec<Slot> =
        world
            .population
            .in_radius(&v.pos, world.params.v_radius, Some(slot), BreedSet::RESTING);
    let mut activated = false;
    for t in targets {
        if world.rng.bernoulli(world.params.mimicry) {
            let breed = world.population.get(t).breed;
            if let Some(next) = breed.activated() {
                world.population.set_breed(t, next);
                if breed.is_treg() {
                    world.events.treg_activations += 1;
                } else {
                    world.events.teff_activations += 1;
                }
                activated = true;
            }
        }
    }
    if activated {
        world.population.remove(slot);
        world.events.virus_contact_deaths += 1;
    }
}

pub fn virus_contact_phase(world: &mut WorldState) {
    for slot in 0..world.population.len_slots() {
        if world.population.is_alive(slot) && world.population.get(slot).breed == Breed::Virus {
            virus_contact(world, slot);
        }
    }
}

/// Every live agent pays one energy unit; exhausted agents are removed and
/// the population is compacted.
pub fn reap_phase(world: &mut WorldState) {
    for slot in 0..world.population.len_slots() {
        if !world.population.is_alive(slot) {
            continue;
        }
        let e = world.population.get(slot).energy - 1.0;
        world.population.set_energy(slot, e);
        if e <= 0.0 {
            world.population.remove(slot);
            world.events.energy_deaths += 1;
        }
    }
    world.population.compact();
}

/// Moves every live agent once (id order), then reaps.
pub fn move_and_reap(world: &mut WorldState) {
    for slot in 0..world.population.len_slots() {
        if world.population.is_alive(slot) {
            move_agent(world, slot);
        }
    }
    reap_phase(world);
}

/// Regrowth on ticks that are multiples of `mye_regrow_time`. Patches at
/// zero stay at zero.
pub fn grow_myelin_phase(grid: &mut Grid, params: &SimParams, tick: u64) {
    let every = u64::from(params.mye_regrow_time);
    if every == 0 || !tick.is_multiple_of(every) {
        return;
    }
    for patch in grid.patches_mut() {
        if patch.zone == Zone::WhiteMatter && patch.myelin > 0.0 && patch.myelin < params.init_mye {
            patch.myelin = (patch.myelin + params.rec_mye).min(params.init_mye);
        }
    }
}

/// One countdown step for every open barrier patch. A patch opened earlier
/// in the same tick is skipped, so `Damaged(c)` always means `c` more ticks.
pub fn bbb_recovery_phase(grid: &mut Grid) {
    grid.recover_barriers();
}
