//! Thin wrappers around rayon so every data-parallel site in the crate has a
//! sequential fallback compiled in when the `parallel` feature is off.
//!
//! Parallelism is only ever applied across independent tasks or disjoint
//! output slices; no parallel reductions are performed, so results are
//! bitwise identical regardless of feature flags or thread counts.

/// Run two closures, concurrently when possible.
#[cfg(feature = "parallel")]
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    rayon::join(a, b)
}

/// Run two closures, concurrently when possible.
#[cfg(not(feature = "parallel"))]
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA,
    B: FnOnce() -> RB,
{
    (a(), b())
}

/// Map a function over a mutable slice, element-parallel when possible.
#[cfg(feature = "parallel")]
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    use rayon::prelude::*;
    items.par_iter_mut().enumerate().for_each(|(i, item)| f(i, item));
}

/// Map a function over a mutable slice, element-parallel when possible.
#[cfg(not(feature = "parallel"))]
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    F: Fn(usize, &mut T),
{
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item);
    }
}

/// Sequential twin of [`for_each_mut`], kept callable in all builds so the
/// bench suite can compare both paths directly.
pub fn for_each_mut_serial<T, F>(items: &mut [T], f: F)
where
    F: Fn(usize, &mut T),
{
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item);
    }
}

/// Map over disjoint output rows of length `row_len` stored contiguously.
#[cfg(feature = "parallel")]
pub fn for_each_row_mut<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    use rayon::prelude::*;
    data.par_chunks_mut(row_len).enumerate().for_each(|(i, row)| f(i, row));
}

/// Map over disjoint output rows of length `row_len` stored contiguously.
#[cfg(not(feature = "parallel"))]
pub fn for_each_row_mut<T, F>(data: &mut [T], row_len: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    for (i, row) in data.chunks_mut(row_len).enumerate() {
        f(i, row);
    }
}

/// Sequential twin of [`for_each_row_mut`] for the bench suite.
pub fn for_each_row_mut_serial<T, F>(data: &mut [T], row_len: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    for (i, row) in data.chunks_mut(row_len).enumerate() {
        f(i, row);
    }
}
