//! Tick scheduler and run loop.
//!
//! One tick runs these phases in order, each visiting agents in ascending id
//! order and drawing from the single run-wide [`RngStream`]:
//!
//! 1. census of the incoming state (no draws; see [`run`])
//! 2. influx
//! 3. effectors: move, then active ones attack
//! 4. cytokines: move, then hit the barrier
//! 5. regulators: move, active ones police, then every regulator may divide
//! 6. viruses: move, then contact
//! 7. energy decrement and reaping
//! 8. myelin regrowth, then barrier recovery
//! 9. tick counter advances
//!
//! Agents created during a group phase do not act in that phase; cytokines
//! emitted in phase 3 do act in phase 4.

use alloc::vec::Vec;

use crate::config::{validate, ConfigError, SimParams};
use crate::dynamics::{self, Breed, EventCounts};
use crate::metrics::{collect_metrics, MetricsRecord};
use crate::population::Population;
use crate::rng::RngStream;
use crate::world::Grid;

/// Complete state of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub params: SimParams,
    pub grid: Grid,
    pub population: Population,
    pub tick: u64,
    pub rng: RngStream,
    /// Events of the tick in progress (or the last completed one).
    pub events: EventCounts,
}

impl WorldState {
    /// Empty world: fresh grid, no agents, RNG seeded from `master_seed`.
    pub fn new(params: SimParams) -> Result<Self, ConfigError> {
        validate(&params).map_err(ConfigError::OutOfRange)?;
        Ok(Self {
            grid: Grid::new(&params),
            population: Population::new(),
            tick: 0,
            rng: RngStream::from_seed(params.master_seed),
            events: EventCounts::default(),
            params,
        })
    }

    /// Advances one tick.
    pub fn step(&mut self) {
        self.events = EventCounts::default();

        dynamics::influx_phase(self);

        self.group_phase(Breed::is_teff, |w, slot| {
            dynamics::move_agent(w, slot);
            if w.population.get(slot).breed == Breed::TeffActive {
                dynamics::teff_attack(w, slot);
            }
        });

        self.group_phase(
            |b| b == Breed::Cytokine,
            |w, slot| {
                dynamics::move_agent(w, slot);
                dynamics::cytokine_hit(w, slot);
            },
        );

        self.group_phase(Breed::is_treg, |w, slot| {
            dynamics::move_agent(w, slot);
            if w.population.get(slot).breed == Breed::TregActive {
                dynamics::treg_police(w, slot);
            }
            dynamics::treg_reproduce(w, slot);
        });

        self.group_phase(
            |b| b == Breed::Virus,
            |w, slot| {
                dynamics::move_agent(w, slot);
                dynamics::virus_contact(w, slot);
            },
        );

        dynamics::reap_phase(self);

        dynamics::grow_myelin_phase(&mut self.grid, &self.params, self.tick);
        dynamics::bbb_recovery_phase(&mut self.grid);

        self.tick += 1;
    }

    /// Runs `act` on every agent alive at phase start whose breed matches.
    fn group_phase(
        &mut self,
        member: impl Fn(Breed) -> bool,
        mut act: impl FnMut(&mut Self, usize),
    ) {
        let n = self.population.len_slots();
        for slot in 0..n {
            if self.population.is_alive(slot) && member(self.population.get(slot).breed) {
                act(self, slot);
            }
        }
    }
}

/// Validates `params` and places the initial Treg, Teff and virus cohorts.
pub fn init_run(params: SimParams) -> Result<WorldState, ConfigError> {
    let mut w = WorldState::new(params)?;
    dynamics::scatter(
        &mut w,
        Breed::TregResting,
        params.init_treg_n,
        params.treg_life,
    );
    dynamics::scatter(
        &mut w,
        Breed::TeffResting,
        params.init_teff_n,
        params.teff_life,
    );
    dynamics::scatter(&mut w, Breed::Virus, params.init_virus_n, params.v_energy);
    Ok(w)
}

/// Advances one tick. Same as [`WorldState::step`].
pub fn tick(world: &mut WorldState) {
    world.step();
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// `ticks + 1` records; the first is the initial census.
    pub records: Vec<MetricsRecord>,
    pub final_state: WorldState,
    /// Totals over the whole run.
    pub events: EventCounts,
}

/// Runs `ticks` ticks from `init_run(params)`.
pub fn run(params: SimParams, ticks: u32) -> Result<RunOutput, ConfigError> {
    run_with(params, ticks, |_| {})
}

/// Like [`run`], calling `observe` on the initial state and after every tick.
pub fn run_with(
    params: SimParams,
    ticks: u32,
    mut observe: impl FnMut(&WorldState),
) -> Result<RunOutput, ConfigError> {
    let mut world = init_run(params)?;
    let mut records = Vec::with_capacity(ticks as usize + 1);
    let mut events = EventCounts::default();
    records.push(collect_metrics(&world));
    observe(&world);
    for _ in 0..ticks {
        world.step();
        events.accumulate(&world.events);
        records.push(collect_metrics(&world));
        observe(&world);
    }
    Ok(RunOutput {
        records,
        final_state: world,
        events,
    })
}
