//! Grid evaluation strategy.
//!
//! Grid points are independent, so spectra are mapped over the grid either on
//! the rayon pool or on the calling thread. Results are collected in grid
//! order in both cases, so output does not depend on the partitioning.
//! Without the `parallel` feature, [`Execution::Parallel`] runs sequentially.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether this mode actually fans out to worker threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn try_map<T, R, F>(items: &[T], mode: Execution, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(&f).collect();
        }
    }
    let _ = mode;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn modes_agree_and_keep_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let f = |x: &u64| -> Result<u64> { Ok(x * x) };
        let a = try_map(&xs, Execution::Parallel, f).unwrap();
        let b = try_map(&xs, Execution::Sequential, f).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[999], 999 * 999);
    }

    #[test]
    fn errors_propagate() {
        let xs = [1, 2, 3];
        let r = try_map(&xs, Execution::Parallel, |x| {
            if *x == 2 {
                Err(Error::Numerical("boom".into()))
            } else {
                Ok(*x)
            }
        });
        assert!(r.is_err());
    }
}
