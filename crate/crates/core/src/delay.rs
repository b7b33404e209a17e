//! Component selection, delayed indexes and the delayed-gradient table.
//!
//! A [`DelayEngine`] owns a [`GradientTable`] plus a short history of past
//! points. Before each step the engine brings every slot into the window
//! `[max(0, k − b), k]` required by the schedule; the solver then reads the
//! table and writes back the slot it recomputed.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Result};
use crate::linalg::Vector;

/// Aggregate recomputed from scratch after this many refreshes.
const RESUM_PERIOD: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayPolicy {
    /// `ℓ_i` is the last iteration at which component `i` was selected. With
    /// random selection a slot older than the bound is refreshed at `x_k`.
    LastUpdate { bound: Option<usize> },
    /// `ℓ_i = max(0, k − d)` (never moving a slot backwards).
    FixedDelay(usize),
    /// `ℓ_i` drawn uniformly from `[max(0, k − b), k]` each step (never
    /// moving a slot backwards).
    UniformRandom { bound: usize, seed: u64 },
    /// `ℓ_i = k`.
    ZeroDelay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Cyclic,
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelaySchedule {
    pub policy: DelayPolicy,
    pub selection: Selection,
}

impl DelaySchedule {
    pub fn new(policy: DelayPolicy, selection: Selection) -> Self {
        Self { policy, selection }
    }

    pub fn zero_delay() -> Self {
        Self::new(DelayPolicy::ZeroDelay, Selection::Cyclic)
    }

    pub fn last_update() -> Self {
        Self::new(DelayPolicy::LastUpdate { bound: None }, Selection::Cyclic)
    }

    /// Delay bound `b` for `m` components.
    pub fn bound(&self, m: usize) -> usize {
        match self.policy {
            DelayPolicy::LastUpdate { bound } => bound.unwrap_or(m.saturating_sub(1)),
            DelayPolicy::FixedDelay(d) => d,
            DelayPolicy::UniformRandom { bound, .. } => bound,
            DelayPolicy::ZeroDelay => 0,
        }
    }

    /// Component used at iteration `k`. Random selection is a pure function
    /// of `(seed, k)`, so replays agree without shared state.
    pub fn select(&self, k: usize, m: usize) -> usize {
        debug_assert!(m >= 1);
        match self.selection {
            Selection::Cyclic => k % m,
            Selection::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_word_pos(k as u128 * 16);
                rng.gen_range(0..m)
            }
        }
    }
}

/// Per-slot and maximum staleness `k − stamp_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StalenessReport {
    pub per_slot: Vec<usize>,
    pub max: usize,
}

/// Stored gradients `g_i = ∇f_i(x_{ℓ_i})`, their stamps `ℓ_i` and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTable {
    slots: Vec<Vector>,
    stamps: Vec<usize>,
    aggregate: Vector,
    refreshes: usize,
}

impl GradientTable {
    pub fn new(slots: Vec<Vector>, stamp: usize) -> Result<Self> {
        let n = slots.first().map_or(0, Vector::len);
        for s in &slots {
            check_dim("table slot", n, s.len())?;
        }
        let aggregate = sum(&slots, n);
        Ok(Self {
            stamps: vec![stamp; slots.len()],
            slots,
            aggregate,
            refreshes: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, i: usize) -> &Vector {
        &self.slots[i]
    }

    pub fn slots(&self) -> &[Vector] {
        &self.slots
    }

    pub fn stamps(&self) -> &[usize] {
        &self.stamps
    }

    pub fn aggregate(&self) -> &Vector {
        &self.aggregate
    }

    /// `Σ_{j≠i} g_j`.
    pub fn sum_except(&self, i: usize) -> Vector {
        &self.aggregate - &self.slots[i]
    }

    pub fn refresh(&mut self, i: usize, g: Vector, stamp: usize) {
        debug_assert_eq!(g.len(), self.aggregate.len());
        self.aggregate += &g - &self.slots[i];
        self.slots[i] = g;
        self.stamps[i] = stamp;
        self.refreshes += 1;
        if self.refreshes.is_multiple_of(RESUM_PERIOD) {
            self.resum();
        }
    }

    pub fn resum(&mut self) {
        self.aggregate = sum(&self.slots, self.aggregate.len());
    }

    /// Largest entrywise gap between the running aggregate and a fresh sum.
    pub fn drift(&self) -> f64 {
        (&self.aggregate - sum(&self.slots, self.aggregate.len())).amax()
    }

    pub fn staleness_report(&self, k: usize) -> StalenessReport {
        let per_slot: Vec<usize> = self.stamps.iter().map(|&s| k.saturating_sub(s)).collect();
        let max = per_slot.iter().copied().max().unwrap_or(0);
        StalenessReport { per_slot, max }
    }
}

fn sum(slots: &[Vector], n: usize) -> Vector {
    slots.iter().fold(Vector::zeros(n), |acc, s| acc + s)
}

/// Applies a [`DelaySchedule`] to a [`GradientTable`]. `P` is whatever point
/// the slots are functions of: a primal iterate, a multiplier, or a set of
/// block iterates.
#[derive(Debug, Clone)]
pub struct DelayEngine<P> {
    schedule: DelaySchedule,
    m: usize,
    bound: usize,
    history: VecDeque<(usize, P)>,
    table: GradientTable,
    rng: Option<ChaCha8Rng>,
    evaluations: usize,
}

impl<P: Clone> DelayEngine<P> {
    /// Fill every slot at `start` with stamp 0.
    pub fn new<E>(schedule: DelaySchedule, m: usize, start: &P, mut eval: E) -> Result<Self>
    where
        E: FnMut(usize, &P) -> Result<Vector>,
    {
        let slots = (0..m).map(|i| eval(i, start)).collect::<Result<Vec<_>>>()?;
        let rng = match schedule.policy {
            DelayPolicy::UniformRandom { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        let mut history = VecDeque::new();
        history.push_back((0, start.clone()));
        Ok(Self {
            schedule,
            m,
            bound: schedule.bound(m),
            history,
            table: GradientTable::new(slots, 0)?,
            rng,
            evaluations: m,
        })
    }

    pub fn schedule(&self) -> &DelaySchedule {
        &self.schedule
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn table(&self) -> &GradientTable {
        &self.table
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn select(&self, k: usize) -> usize {
        self.schedule.select(k, self.m)
    }

    /// Record `point` as `x_k` and bring the table into the window required
    /// at step `k`. The slot of `selected` is skipped unless
    /// `include_selected` is set (methods that recompute it themselves).
    pub fn prepare<E>(
        &mut self,
        k: usize,
        point: &P,
        selected: usize,
        include_selected: bool,
        mut eval: E,
    ) -> Result<()>
    where
        E: FnMut(usize, &P) -> Result<Vector>,
    {
        if self.history.back().map(|(s, _)| *s) != Some(k) {
            self.history.push_back((k, point.clone()));
        }
        while self.history.front().is_some_and(|(s, _)| *s + self.bound < k) {
            self.history.pop_front();
        }
        let floor = k.saturating_sub(self.bound);
        for i in 0..self.m {
            let skip = i == selected && !include_selected;
            let target = match self.schedule.policy {
                DelayPolicy::ZeroDelay => Some(k),
                DelayPolicy::FixedDelay(_) => Some(floor),
                DelayPolicy::UniformRandom { .. } => {
                    // Always draw so the random stream does not depend on
                    // which slots are skipped.
                    let rng = self.rng.as_mut().expect("uniform policy has an rng");
                    let draw = rng.gen_range(floor..=k);
                    Some(if skip { floor } else { draw })
                }
                DelayPolicy::LastUpdate { .. } => {
                    // The selected slot is refreshed, and so is any slot
                    // that would otherwise break the bound.
                    (i == selected || self.table.stamps[i] < floor).then_some(k)
                }
            };
            let Some(target) = target else { continue };
            let stale = self.table.stamps[i] < floor;
            if (skip && !stale) || target <= self.table.stamps[i] {
                continue;
            }
            let target = if skip { k } else { target };
            let g = {
                let p = self.point_at(target);
                eval(i, p)?
            };
            self.evaluations += 1;
            self.table.refresh(i, g, target);
        }
        Ok(())
    }

    fn point_at(&self, stamp: usize) -> &P {
        &self
            .history
            .iter()
            .find(|(s, _)| *s == stamp)
            .expect("history covers the delay window")
            .1
    }

    /// Overwrite slot `i` with a value the solver computed itself.
    pub fn refresh(&mut self, i: usize, g: Vector, stamp: usize) {
        self.table.refresh(i, g, stamp);
    }

    /// Count evaluations made outside [`Self::prepare`].
    pub fn count_evaluation(&mut self) {
        self.evaluations += 1;
    }

    pub fn staleness(&self, k: usize) -> usize {
        self.table.staleness_report(k).max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    fn v1(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn cyclic_selection() {
        let s = DelaySchedule::zero_delay();
        assert_eq!(s.select(5, 3), 2);
        assert_eq!(s.select(0, 1), 0);
    }

    #[test]
    fn random_selection_is_uniform_and_replayable() {
        let s = DelaySchedule::new(DelayPolicy::ZeroDelay, Selection::Random { seed: 7 });
        let mut counts = [0usize; 4];
        for k in 0..10_000 {
            counts[s.select(k, 4)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.25).abs() <= 0.25);
            assert!((c as f64 / 10_000.0 - 0.25).abs() <= 0.02);
        }
        let again: Vec<_> = (0..50).map(|k| s.select(k, 4)).collect();
        let first: Vec<_> = (0..50).map(|k| s.select(k, 4)).collect();
        assert_eq!(again, first);
    }

    #[test]
    fn refresh_updates_aggregate() {
        let mut t = GradientTable::new(vec![v1(1.0), v1(2.0)], 0).unwrap();
        t.refresh(0, v1(5.0), 3);
        assert_eq!(t.aggregate()[0], 7.0);
        assert_eq!(t.stamps(), &[3, 0]);
        t.refresh(1, v1(2.0), 4);
        assert_eq!(t.aggregate()[0], 7.0);
    }

    #[test]
    fn staleness_report_example() {
        let mut t = GradientTable::new(vec![v1(0.0), v1(0.0)], 0).unwrap();
        t.refresh(0, v1(0.0), 3);
        t.refresh(1, v1(0.0), 5);
        let r = t.staleness_report(5);
        assert_eq!(r.per_slot, vec![2, 0]);
        assert_eq!(r.max, 2);
    }

    // Drive an engine with scalar points x_k = k and slot value = ℓ_i.
    fn simulate(schedule: DelaySchedule, m: usize, steps: usize) -> Vec<(Vec<usize>, usize)> {
        let eval = |_: usize, p: &f64| Ok(v1(*p));
        let mut eng = DelayEngine::new(schedule, m, &0.0, eval).unwrap();
        let mut out = Vec::new();
        for k in 0..steps {
            let i = eng.select(k);
            eng.prepare(k, &(k as f64), i, true, eval).unwrap();
            for (slot, &stamp) in eng.table().slots().iter().zip(eng.table().stamps()) {
                assert_eq!(slot[0], stamp as f64);
            }
            out.push((eng.table().stamps().to_vec(), eng.staleness(k)));
        }
        out
    }

    #[test]
    fn last_update_cyclic_staleness_is_m_minus_one() {
        let run = simulate(DelaySchedule::last_update(), 3, 101);
        assert_eq!(run[100].1, 2);
        assert!(run.iter().all(|(_, s)| *s <= 2));
    }

    #[test]
    fn zero_delay_has_no_staleness() {
        assert!(simulate(DelaySchedule::zero_delay(), 4, 50)
            .iter()
            .all(|(_, s)| *s == 0));
    }

    #[test]
    fn fixed_delay_clamps_at_start() {
        let s = DelaySchedule::new(DelayPolicy::FixedDelay(3), Selection::Cyclic);
        let run = simulate(s, 2, 10);
        assert_eq!(run[1].0, vec![0, 0]);
        assert_eq!(run[9].0, vec![6, 6]);
    }

    #[test]
    fn aggregate_survives_many_refreshes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let slots = (0..5)
            .map(|_| Vector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        let mut t = GradientTable::new(slots, 0).unwrap();
        for k in 0..1000 {
            let i = rng.gen_range(0..5);
            let g = Vector::from_fn(3, |_, _| rng.gen_range(-1e3..1e3));
            t.refresh(i, g, k);
            assert!(t.drift() <= 1e-12 * 1e3);
        }
        assert!(t.drift() <= 1e-12);
    }

    proptest! {
        #[test]
        fn every_policy_respects_its_bound(
            m in 1usize..6,
            b in 0usize..6,
            seed in 0u64..1000,
            random_selection in any::<bool>(),
            policy_tag in 0usize..4,
        ) {
            let policy = match policy_tag {
                0 => DelayPolicy::LastUpdate { bound: Some(b) },
                1 => DelayPolicy::FixedDelay(b),
                2 => DelayPolicy::UniformRandom { bound: b, seed },
                _ => DelayPolicy::ZeroDelay,
            };
            let selection = if random_selection { Selection::Random { seed } } else { Selection::Cyclic };
            let schedule = DelaySchedule::new(policy, selection);
            let bound = schedule.bound(m);
            let run = simulate(schedule, m, 60);
            for (k, (stamps, stale)) in run.iter().enumerate() {
                prop_assert!(*stale <= bound);
                for &s in stamps {
                    prop_assert!(s <= k && s + bound >= k);
                }
            }
            prop_assert_eq!(run, simulate(schedule, m, 60));
        }
    }
}
