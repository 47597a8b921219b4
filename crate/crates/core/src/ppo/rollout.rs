//! On-policy experience collection.

use crate::envs::{DynParams, Environment, MuSpec};
use crate::error::Result;
use crate::policies::{InputPipeline, PolicyNet};
use crate::LabRng;

/// Where episode dynamics come from during collection.
pub enum MuSource<'a> {
    /// Fresh draw at every episode start, held fixed within the episode.
    Resample(&'a MuSpec),
    /// One fixed vector for every episode (target environments, oracles).
    Fixed(&'a DynParams),
}

impl MuSource<'_> {
    fn next_mu(&self, rng: &mut LabRng) -> DynParams {
        match self {
            MuSource::Resample(spec) => spec.sample(rng),
            MuSource::Fixed(mu) => (*mu).clone(),
        }
    }
}

/// One contiguous episode inside a batch.
#[derive(Debug, Clone)]
pub struct EpisodeSlice {
    pub start: usize,
    pub len: usize,
    /// Environment-terminal end (fall), as opposed to a horizon cut.
    pub terminal: bool,
    /// V(s_T) for bootstrapping when not terminal.
    pub bootstrap: f64,
    pub mu: DynParams,
    pub undiscounted_return: f64,
}

/// Time-indexed arrays of one collection phase, plus per-episode bookkeeping.
/// `inputs` are assembled policy inputs; `observations` keep the raw sensor
/// vectors for system-identification datasets.
#[derive(Debug, Clone, Default)]
pub struct RolloutBatch {
    pub inputs: Vec<Vec<f64>>,
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub terminals: Vec<bool>,
    pub episodes: Vec<EpisodeSlice>,
}

impl RolloutBatch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn mean_episode_return(&self) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        self.episodes
            .iter()
            .map(|e| e.undiscounted_return)
            .sum::<f64>()
            / self.episodes.len() as f64
    }

    pub fn consistency_check(&self) -> bool {
        let n = self.len();
        let arrays_equal = self.inputs.len() == n
            && self.observations.len() == n
            && self.actions.len() == n
            && self.values.len() == n
            && self.log_probs.len() == n
            && self.terminals.len() == n;
        let mut covered = 0usize;
        let mut boundaries_ok = true;
        for e in &self.episodes {
            if e.start != covered {
                boundaries_ok = false;
            }
            covered += e.len;
            // Terminal flag may only be set on an episode's last step.
            for t in e.start..e.start + e.len {
                let is_last = t + 1 == e.start + e.len;
                if self.terminals[t] && !(is_last && e.terminal) {
                    boundaries_ok = false;
                }
                if is_last && e.terminal && !self.terminals[t] {
                    boundaries_ok = false;
                }
            }
        }
        arrays_equal && boundaries_ok && covered == n
    }
}

/// Collect complete episodes until at least `n_steps` environment steps have
/// been taken. μ is drawn per episode and recorded; episodes end on
/// termination or at the config horizon (bootstrapped). The value net scores
/// states on the fly so GAE can run immediately afterwards.
pub fn collect_rollouts<E: Environment>(
    policy: &PolicyNet,
    value: &crate::Mlp,
    pipeline: &mut InputPipeline,
    env: &mut E,
    mu_source: &MuSource,
    n_steps: usize,
    rng: &mut LabRng,
) -> Result<RolloutBatch> {
    collect_rollouts_capped(policy, value, pipeline, env, mu_source, n_steps, None, rng)
}

/// Like [`collect_rollouts`], but with `cap = Some(c)` collection stops
/// mid-episode at exactly `c` steps (bootstrapped cut) — used wherever a
/// sample budget must be hit exactly.
#[allow(clippy::too_many_arguments)]
pub fn collect_rollouts_capped<E: Environment>(
    policy: &PolicyNet,
    value: &crate::Mlp,
    pipeline: &mut InputPipeline,
    env: &mut E,
    mu_source: &MuSource,
    n_steps: usize,
    cap: Option<usize>,
    rng: &mut LabRng,
) -> Result<RolloutBatch> {
    let horizon = env.config().horizon as usize;
    let hard_cap = cap.unwrap_or(usize::MAX);
    let mut batch = RolloutBatch::default();
    while batch.len() < n_steps.min(hard_cap) {
        let mu = mu_source.next_mu(rng);
        let mu_norm = mu.normalized();
        let mut obs = env.reset(&mu, rng)?;
        pipeline.reset(&mu_norm);
        let start = batch.len();
        let mut ep_return = 0.0;
        let mut terminal = false;
        for _ in 0..horizon {
            if batch.len() >= hard_cap {
                break;
            }
            let input = pipeline.assemble(&obs);
            let (action, log_prob) = policy.act_sample(&input, rng)?;
            pipeline.record_action(&action);
            let v = value.forward(&input)?[0];
            let result = env.step(&action)?;
            ep_return += result.reward;
            batch.inputs.push(input);
            batch.observations.push(obs);
            batch.actions.push(action);
            batch.rewards.push(result.reward);
            batch.values.push(v);
            batch.log_probs.push(log_prob);
            batch.terminals.push(result.terminated);
            obs = result.observation;
            if result.terminated {
                terminal = true;
                break;
            }
        }
        let bootstrap = if terminal {
            0.0
        } else {
            // Horizon or cap cut: bootstrap from the value of the next state.
            let input = pipeline.assemble(&obs);
            value.forward(&input)?[0]
        };
        batch.episodes.push(EpisodeSlice {
            start,
            len: batch.len() - start,
            terminal,
            bootstrap,
            mu,
            undiscounted_return: ep_return,
        });
    }
    debug_assert!(batch.consistency_check());
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{EnvConfig, LabEnv};
    use crate::policies::{InputMode, PolicyNet};
    use crate::rng::seeded;

    fn setup() -> (PolicyNet, crate::Mlp, LabEnv, MuSpec) {
        let cfg = EnvConfig::pendulum_x();
        let spec = cfg.mu_spec().unwrap();
        let mut rng = seeded(1);
        let policy = PolicyNet::init(3 + spec.dim(), 1, &mut rng).unwrap();
        let value = crate::policies::value_net(3 + spec.dim(), &mut rng).unwrap();
        let env = LabEnv::build(cfg).unwrap();
        (policy, value, env, spec)
    }

    #[test]
    fn pendulum_has_exactly_five_episodes_per_1000_steps() {
        let (policy, value, mut env, spec) = setup();
        let mut pipeline = InputPipeline::new(
            InputMode::MuConditioned { mu_dim: spec.dim() },
            3,
        );
        let mut rng = seeded(2);
        let batch = collect_rollouts(
            &policy,
            &value,
            &mut pipeline,
            &mut env,
            &MuSource::Resample(&spec),
            1000,
            &mut rng,
        )
        .unwrap();
        assert_eq!(batch.len(), 1000);
        assert_eq!(batch.episodes.len(), 5);
        assert!(batch.consistency_check());
        // Horizon cuts are not terminal; bootstraps recorded.
        assert!(batch.episodes.iter().all(|e| !e.terminal));
    }

    #[test]
    fn collection_is_deterministic() {
        let run = || {
            let (policy, value, mut env, spec) = setup();
            let mut pipeline = InputPipeline::new(
                InputMode::MuConditioned { mu_dim: spec.dim() },
                3,
            );
            let mut rng = seeded(3);
            let b = collect_rollouts(
                &policy,
                &value,
                &mut pipeline,
                &mut env,
                &MuSource::Resample(&spec),
                600,
                &mut rng,
            )
            .unwrap();
            (b.rewards.clone(), b.actions.clone())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn fixed_mu_source_shares_mu_across_episodes() {
        let (policy, value, mut env, spec) = setup();
        let mu = spec.midpoint();
        let mut pipeline = InputPipeline::new(
            InputMode::MuConditioned { mu_dim: spec.dim() },
            3,
        );
        let mut rng = seeded(4);
        let batch = collect_rollouts(
            &policy,
            &value,
            &mut pipeline,
            &mut env,
            &MuSource::Fixed(&mu),
            500,
            &mut rng,
        )
        .unwrap();
        for e in &batch.episodes {
            assert_eq!(e.mu.values, mu.values);
        }
    }
}
