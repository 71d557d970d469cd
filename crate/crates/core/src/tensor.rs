//! Axis-wise operations on flat tensors stored with axis 0 varying fastest.

/// Strides of a tensor: `(inner, len, outer)` for `axis`, where a fiber
/// starts at `o * inner * len + i` and steps by `inner`.
#[inline]
pub fn axis_layout(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let inner: usize = shape[..axis].iter().product();
    let outer: usize = shape[axis + 1..].iter().product();
    (inner, shape[axis], outer)
}

/// Calls `f(start, stride)` for every fiber along `axis`.
pub fn for_each_fiber(shape: &[usize], axis: usize, mut f: impl FnMut(usize, usize)) {
    let (inner, len, outer) = axis_layout(shape, axis);
    for o in 0..outer {
        for i in 0..inner {
            f(o * inner * len + i, inner);
        }
    }
}

/// Contract `x` along `axis` with `w`, producing the tensor of the remaining
/// axes (same fastest-first ordering).
pub fn contract_axis(x: &[f64], shape: &[usize], axis: usize, w: &[f64], out: &mut [f64]) {
    let (inner, len, outer) = axis_layout(shape, axis);
    debug_assert_eq!(w.len(), len);
    debug_assert_eq!(out.len(), inner * outer);
    out.iter_mut().for_each(|v| *v = 0.0);
    for o in 0..outer {
        let base = o * inner * len;
        let dst = &mut out[o * inner..(o + 1) * inner];
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            let src = &x[base + k * inner..base + (k + 1) * inner];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += wk * s;
            }
        }
    }
}

/// Contraction with a sparse vector given as `(index, weight)` pairs.
pub fn contract_axis_sparse(
    x: &[f64],
    shape: &[usize],
    axis: usize,
    w: &[(usize, f64)],
    out: &mut [f64],
) {
    let (inner, len, outer) = axis_layout(shape, axis);
    out.iter_mut().for_each(|v| *v = 0.0);
    for o in 0..outer {
        let base = o * inner * len;
        let dst = &mut out[o * inner..(o + 1) * inner];
        for &(k, wk) in w {
            let src = &x[base + k * inner..base + (k + 1) * inner];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += wk * s;
            }
        }
    }
}

/// `out += scale * (w along axis) ⊗ face`.
pub fn expand_axis(
    face: &[f64],
    shape: &[usize],
    axis: usize,
    w: &[f64],
    scale: f64,
    out: &mut [f64],
) {
    let (inner, len, outer) = axis_layout(shape, axis);
    debug_assert_eq!(w.len(), len);
    for o in 0..outer {
        let base = o * inner * len;
        let src = &face[o * inner..(o + 1) * inner];
        for (k, &wk) in w.iter().enumerate() {
            let c = scale * wk;
            if c == 0.0 {
                continue;
            }
            let dst = &mut out[base + k * inner..base + (k + 1) * inner];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    }
}

pub fn expand_axis_sparse(
    face: &[f64],
    shape: &[usize],
    axis: usize,
    w: &[(usize, f64)],
    scale: f64,
    out: &mut [f64],
) {
    let (inner, len, outer) = axis_layout(shape, axis);
    for o in 0..outer {
        let base = o * inner * len;
        let src = &face[o * inner..(o + 1) * inner];
        for &(k, wk) in w {
            let c = scale * wk;
            let dst = &mut out[base + k * inner..base + (k + 1) * inner];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    }
}

/// Apply a linear map to every fiber along `axis` (in place).
/// `f(fiber_in, fiber_out)` receives contiguous copies.
pub fn map_fibers(
    x: &mut [f64],
    shape: &[usize],
    axis: usize,
    mut f: impl FnMut(&[f64], &mut [f64]),
) {
    let len = shape[axis];
    let mut a = vec![0.0; len];
    let mut b = vec![0.0; len];
    for_each_fiber(shape, axis, |start, stride| {
        for k in 0..len {
            a[k] = x[start + k * stride];
        }
        f(&a, &mut b);
        for k in 0..len {
            x[start + k * stride] = b[k];
        }
    });
}

/// Shape of the face tensor obtained by removing `axis`.
pub fn face_shape(shape: &[usize], axis: usize) -> Vec<usize> {
    shape
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != axis)
        .map(|(_, &s)| s)
        .collect()
}

/// Multi-index of flat position `flat`.
pub fn unravel(mut flat: usize, shape: &[usize], idx: &mut [usize]) {
    for (a, &s) in shape.iter().enumerate() {
        idx[a] = flat % s;
        flat /= s;
    }
}

pub fn ravel(idx: &[usize], shape: &[usize]) -> usize {
    let mut flat = 0;
    for a in (0..shape.len()).rev() {
        flat = flat * shape[a] + idx[a];
    }
    flat
}
