//! Market simulator: one customer per period choosing from the offered
//! assortment under the true preferences.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::SalesHistory;
use crate::mnl::{sample_purchase, Assortment, ProblemInstance};

/// Live state of one simulated sales horizon.
///
/// The sale stops as soon as some resource holds less than the largest
/// single-purchase consumption of that resource, so no later purchase can
/// drive inventory negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub inventory: Vec<f64>,
    pub cum_revenue: f64,
    /// Number of periods offered so far.
    pub period: usize,
    pub last_assortment: Option<Assortment>,
    pub switches: usize,
    pub stopped: bool,
    pub log: SalesHistory,
    reserve: Vec<f64>,
}

impl SimState {
    pub fn new(inst: &ProblemInstance) -> Self {
        let mut state = SimState {
            inventory: inst.initial_inventory(),
            cum_revenue: 0.0,
            period: 0,
            last_assortment: None,
            switches: 0,
            stopped: false,
            log: SalesHistory::new(),
            reserve: inst.max_consumption(),
        };
        state.stopped = state.depleted();
        state
    }

    fn depleted(&self) -> bool {
        self.inventory.iter().zip(&self.reserve).any(|(c, r)| c < r)
    }

    /// Shows `s` to the next customer and returns the purchase (0-based
    /// product slot, `None` for no purchase).
    pub fn offer<R: Rng + ?Sized>(&mut self, inst: &ProblemInstance, s: &Assortment, rng: &mut R) -> Result<Option<usize>> {
        if self.stopped {
            return Err(Error::Stopped);
        }
        s.check_dim(inst.n_products)?;
        let purchase = sample_purchase(s, &inst.true_pref, rng)?;
        self.period += 1;
        self.log.push(self.period, s.clone(), purchase)?;
        if let Some(i) = purchase {
            self.cum_revenue += inst.revenue[i];
            for (c, a) in self.inventory.iter_mut().zip(&inst.consumption[i]) {
                *c -= a;
            }
        }
        if self.last_assortment.as_ref().is_some_and(|last| last != s) {
            self.switches += 1;
        }
        self.last_assortment = Some(s.clone());
        self.stopped = self.depleted();
        Ok(purchase)
    }
}

/// Initial state: full inventory, zeroed counters, empty log.
pub fn init_state(inst: &ProblemInstance) -> SimState {
    SimState::new(inst)
}

/// Number of consecutive offered pairs whose assortments differ.
pub fn count_switches(log: &SalesHistory) -> usize {
    log.records().windows(2).filter(|w| w[0].assortment != w[1].assortment).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mnl::PreferenceVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_resources() -> ProblemInstance {
        ProblemInstance::new(
            vec![0.8, 0.4],
            vec![vec![0.5, 0.1], vec![0.2, 0.9]],
            vec![0.2, 0.5],
            100,
            PreferenceVector::new(vec![1.5, 0.7]).unwrap(),
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn initial_state() {
        let s = init_state(&two_resources());
        assert_eq!(s.inventory, vec![20.0, 50.0]);
        assert_eq!(s.cum_revenue, 0.0);
        assert_eq!(s.switches, 0);
        assert!(!s.stopped);
        assert!(s.log.is_empty());
    }

    #[test]
    fn empty_offer_changes_nothing() {
        let inst = two_resources();
        let mut s = init_state(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(s.offer(&inst, &Assortment::empty(), &mut rng).unwrap(), None);
        assert_eq!(s.inventory, vec![20.0, 50.0]);
        assert_eq!(s.cum_revenue, 0.0);
        assert_eq!(s.period, 1);
    }

    #[test]
    fn switch_counting() {
        let inst = two_resources();
        let mut s = init_state(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = Assortment::singleton(0);
        let b = Assortment::new(vec![0, 1]);
        s.offer(&inst, &a, &mut rng).unwrap();
        assert_eq!(s.switches, 0);
        s.offer(&inst, &a, &mut rng).unwrap();
        assert_eq!(s.switches, 0);
        s.offer(&inst, &b, &mut rng).unwrap();
        assert_eq!(s.switches, 1);
        s.offer(&inst, &a, &mut rng).unwrap();
        assert_eq!(s.switches, 2);
        assert_eq!(count_switches(&s.log), 2);
    }

    #[test]
    fn stops_before_inventory_can_go_negative() {
        let inst = two_resources().with_horizon(10);
        let mut s = init_state(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let all = Assortment::new(vec![0, 1]);
        while !s.stopped {
            s.offer(&inst, &all, &mut rng).unwrap();
        }
        assert!(s.inventory.iter().all(|&c| c >= 0.0));
        assert_eq!(s.offer(&inst, &all, &mut rng).unwrap_err(), Error::Stopped);
    }

    #[test]
    fn tiny_stock_starts_stopped() {
        let inst = two_resources().with_horizon(1);
        // 0.2 < max a(i, 0) = 0.5
        assert!(init_state(&inst).stopped);
    }

    #[test]
    fn replay_is_bitwise_identical() {
        let inst = two_resources();
        let run = || {
            let mut s = init_state(&inst);
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let offers = [Assortment::singleton(0), Assortment::new(vec![0, 1]), Assortment::singleton(1)];
            for t in 0..60 {
                if s.stopped {
                    break;
                }
                s.offer(&inst, &offers[t % 3], &mut rng).unwrap();
            }
            s
        };
        assert_eq!(run(), run());
    }
}
