//! Parallel map helpers with a sequential fallback when the `parallel`
//! feature is off. Every reduction downstream is exact and commutative, so
//! both paths produce bit-identical results.

use crate::error::Result;

/// Below this many items the dispatch overhead outweighs the work.
#[cfg(feature = "parallel")]
pub(crate) const PAR_MIN_ITEMS: usize = 8;

#[cfg(feature = "parallel")]
pub(crate) fn try_map_ordered<T, U, F>(items: Vec<T>, f: F) -> Result<Vec<U>>
where
    T: Send,
    U: Send,
    F: Fn(T) -> Result<U> + Sync + Send,
{
    use rayon::prelude::*;
    if items.len() < PAR_MIN_ITEMS {
        items.into_iter().map(f).collect()
    } else {
        items.into_par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn try_map_ordered<T, U, F>(items: Vec<T>, f: F) -> Result<Vec<U>>
where
    F: Fn(T) -> Result<U>,
{
    items.into_iter().map(f).collect()
}
