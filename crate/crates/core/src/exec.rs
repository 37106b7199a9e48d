//! Order-preserving map over independent jobs, parallel when the
//! `parallel` feature is on.

use serde::{Deserialize, Serialize};

/// How sweep trials are scheduled. Results never depend on this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    /// `Threads(0)` uses the global pool.
    Threads(usize),
    #[default]
    Auto,
}

impl Parallelism {
    pub fn from_threads(threads: usize) -> Self {
        match threads {
            1 => Parallelism::Sequential,
            k => Parallelism::Threads(k),
        }
    }
}

/// `items.map(f)` collected in input order.
pub fn map_ordered<T, R, F>(items: Vec<T>, par: Parallelism, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match par {
        Parallelism::Sequential => items.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Auto | Parallelism::Threads(0) => par_map(items, f),
        #[cfg(feature = "parallel")]
        Parallelism::Threads(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| par_map(items, f)),
            Err(_) => par_map(items, f),
        },
        #[cfg(not(feature = "parallel"))]
        _ => items.into_iter().map(f).collect(),
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}
