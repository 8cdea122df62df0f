//! Batch evaluation over independent instances. With the `parallel`
//! feature the work is spread over the rayon pool; results always come
//! back in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential map, available in every build.
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Parallel map over the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_par<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_par(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        let sq = |x: &u64| x * x;
        assert_eq!(map(&xs, sq), map_seq(&xs, sq));
    }
}
