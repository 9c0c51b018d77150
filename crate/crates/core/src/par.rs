//! Data-parallel helpers. With the `parallel` feature (default) work is
//! spread over rayon's pool; without it, or with [`Execution::Sequential`],
//! the same closures run in order. Results are always returned in input
//! order so outputs do not depend on the mode.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    map(exec, &idx, |&i| f(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let a = map(Execution::Sequential, &xs, |x| x.sqrt());
        let b = map(Execution::Parallel, &xs, |x| x.sqrt());
        assert_eq!(a, b);
        assert_eq!(map_range(Execution::Parallel, 5, |i| i * 2), vec![0, 2, 4, 6, 8]);
    }
}
