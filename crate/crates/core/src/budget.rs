//! Target-environment sample accounting.
//!
//! Every transfer method draws from one [`SampleBudget`]; the only way to
//! step a target environment is through [`BudgetedEnv`], so no code path can
//! consume samples without the counter seeing them.

use crate::envs::{DynParams, EnvConfig, EnvKind, EnvState, Environment, Observation, StepResult};
use crate::error::{Error, Result};
use crate::LabRng;

#[derive(Debug, Clone)]
pub struct SampleBudget {
    cap: u64,
    used: u64,
}

impl SampleBudget {
    pub fn new(cap: u64) -> Self {
        SampleBudget { cap, used: 0 }
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.cap.saturating_sub(self.used)
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.cap
    }

    pub fn try_debit(&mut self, n: u64) -> Result<()> {
        if self.used + n > self.cap {
            return Err(Error::Protocol(format!(
                "budget exhausted: {} used of {}, requested {n}",
                self.used, self.cap
            )));
        }
        self.used += n;
        Ok(())
    }
}

/// Environment wrapper that debits one budget unit per step. Stepping past
/// the cap fails before the step happens.
pub struct BudgetedEnv<'a, E: Environment> {
    env: &'a mut E,
    budget: &'a mut SampleBudget,
}

impl<'a, E: Environment> BudgetedEnv<'a, E> {
    pub fn new(env: &'a mut E, budget: &'a mut SampleBudget) -> Self {
        BudgetedEnv { env, budget }
    }

    pub fn budget(&self) -> &SampleBudget {
        self.budget
    }
}

impl<E: Environment> Environment for BudgetedEnv<'_, E> {
    fn kind(&self) -> EnvKind {
        self.env.kind()
    }
    fn config(&self) -> &EnvConfig {
        self.env.config()
    }
    fn obs_dim(&self) -> usize {
        self.env.obs_dim()
    }
    fn action_dim(&self) -> usize {
        self.env.action_dim()
    }
    fn reset(&mut self, mu: &DynParams, rng: &mut LabRng) -> Result<Observation> {
        self.env.reset(mu, rng)
    }
    fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        self.budget.try_debit(1)?;
        self.env.step(action)
    }
    fn observation(&self) -> Observation {
        self.env.observation()
    }
    fn state(&self) -> EnvState {
        self.env.state()
    }
    fn set_state(&mut self, state: EnvState) -> Result<()> {
        self.env.set_state(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{EnvConfig, LabEnv};
    use crate::rng::seeded;

    #[test]
    fn debit_stops_at_cap() {
        let mut b = SampleBudget::new(3);
        assert!(b.try_debit(2).is_ok());
        assert!(b.try_debit(1).is_ok());
        assert!(b.exhausted());
        assert!(b.try_debit(1).is_err());
        assert_eq!(b.used(), 3);
    }

    #[test]
    fn budgeted_env_counts_every_step() {
        let cfg = EnvConfig::pendulum_x();
        let spec = cfg.mu_spec().unwrap();
        let mut env = LabEnv::build(cfg).unwrap();
        let mut rng = seeded(0);
        let mu = spec.midpoint();
        let mut budget = SampleBudget::new(5);
        {
            let mut benv = BudgetedEnv::new(&mut env, &mut budget);
            benv.reset(&mu, &mut rng).unwrap();
            for _ in 0..5 {
                benv.step(&[0.0]).unwrap();
            }
            assert!(benv.step(&[0.0]).is_err());
        }
        assert_eq!(budget.used(), 5);
    }
}
