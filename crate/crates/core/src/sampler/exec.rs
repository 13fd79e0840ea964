use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::sampler::rng::{block_stream, BLOCK_SHOTS};

/// How shot blocks are scheduled. Output is identical either way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Blocks spread over the rayon pool; sequential without the `parallel` feature.
    #[default]
    Parallel,
}

fn run_block<T, F>(n: usize, seed: u64, block: usize, f: &F) -> Result<Vec<T>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<T>,
{
    let start = block * BLOCK_SHOTS;
    let len = BLOCK_SHOTS.min(n - start);
    let mut rng = block_stream(seed, block as u64);
    (0..len).map(|_| f(&mut rng)).collect()
}

/// Runs `n` independent draws of `shot`, in block order.
pub fn run_shots<T, F>(n: usize, seed: u64, exec: Execution, shot: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let blocks = n.div_ceil(BLOCK_SHOTS);
    let chunks: Vec<Vec<T>> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..blocks)
                .into_par_iter()
                .map(|b| run_block(n, seed, b, &shot))
                .collect::<Result<_>>()?
        }
        _ => (0..blocks)
            .map(|b| run_block(n, seed, b, &shot))
            .collect::<Result<_>>()?,
    };
    Ok(chunks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn parallel_matches_sequential() {
        let f = |rng: &mut ChaCha8Rng| Ok(rng.random::<u32>());
        let a = run_shots(5000, 3, Execution::Sequential, f).unwrap();
        let b = run_shots(5000, 3, Execution::Parallel, f).unwrap();
        assert_eq!(a.len(), 5000);
        assert_eq!(a, b);
    }
}
