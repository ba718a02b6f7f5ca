use crate::Result;

/// How independent Monte Carlo trials are scheduled.
///
/// Results never depend on this choice: each trial owns its random
/// substream and results are folded in trial order. Without the `parallel`
/// feature, `Parallel` runs sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon workers; `None` uses the global pool.
    Parallel { workers: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { workers: None }
    }
}

impl Execution {
    /// `Sequential` for one worker, otherwise a pool of `workers` threads.
    pub fn with_workers(workers: usize) -> Self {
        if workers <= 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers: Some(workers) }
        }
    }
}

/// `(0..n).map(f)` under the given execution policy, in index order.
pub(crate) fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => Ok((0..n).map(f).collect()),
        Execution::Parallel { workers } => parallel_map(n, workers, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match workers {
        None => Ok((0..n).into_par_iter().map(f).collect()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| crate::Error::InvalidConfig(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, _workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    Ok((0..n).map(f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indexed(100, Execution::Sequential, |i| i * i).unwrap();
        let par = map_indexed(100, Execution::Parallel { workers: Some(4) }, |i| i * i).unwrap();
        let glob = map_indexed(100, Execution::default(), |i| i * i).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq, glob);
        assert_eq!(Execution::with_workers(1), Execution::Sequential);
    }
}
