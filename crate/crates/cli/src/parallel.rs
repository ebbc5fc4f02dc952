use owc_capture::montecarlo::ShardExecutor;
use rayon::prelude::*;

/// Runs Monte Carlo shards on the rayon pool. Results come back in shard
/// order, so estimates match a serial run bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rayon;

impl ShardExecutor for Rayon {
    fn run<T, F>(&self, shards: u64, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..shards).into_par_iter().map(job).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use owc_capture::montecarlo::{simulate_conditional_outage_with, McConfig, Serial};
    use owc_capture::SystemModel;

    #[test]
    fn parallel_equals_serial() {
        let m = SystemModel::reference();
        let mc = McConfig::new(300_001, 77).unwrap();
        let a = simulate_conditional_outage_with(&Rayon, &m, 3, 2.0, &mc).unwrap();
        let b = simulate_conditional_outage_with(&Serial, &m, 3, 2.0, &mc).unwrap();
        assert_eq!(a, b);
    }
}
