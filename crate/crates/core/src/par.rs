//! Data-parallel helpers. With the `parallel` feature these run on the rayon
//! pool; without it they fall back to plain sequential iteration.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use std::cell::Cell;

thread_local! {
    static SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

fn sequential() -> bool {
    !cfg!(feature = "parallel") || SEQUENTIAL.with(|s| s.get())
}

/// Run `f` with `threads` workers. `1` takes the sequential path on the
/// calling thread; `0` keeps the global pool.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    if threads == 1 || !cfg!(feature = "parallel") {
        let old = SEQUENTIAL.with(|s| s.replace(true));
        let out = f();
        SEQUENTIAL.with(|s| s.set(old));
        return out;
    }
    #[cfg(feature = "parallel")]
    if threads > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(f);
        }
    }
    f()
}

/// Map `f` over `0..n`, preserving order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if sequential() {
        return (0..n).map(f).collect();
    }
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    unreachable!()
}

/// Map `f` over a slice, preserving order.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if sequential() {
        return items.iter().map(f).collect();
    }
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    unreachable!()
}

/// Whether the parallel backend is compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_agree() {
        let f = |i: usize| i * i + 1;
        let par_out = with_threads(3, || map_range(50, f));
        let seq_out = with_threads(1, || map_range(50, f));
        assert_eq!(par_out, seq_out);
        assert_eq!(
            with_threads(1, || map_slice(&[1, 2, 3], |x| x * 2)),
            vec![2, 4, 6]
        );
    }
}
