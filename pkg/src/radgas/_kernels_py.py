"""Pure python fallback for the collision inner loops.

Same call signatures and the same mathematics as the compiled backend;
vectorized with numpy over partner nodes and quadrature points.  The
floating point accumulation order differs from the compiled loops, so the
two backends agree to roundoff rather than bitwise.  Gather points are
classified and weighted from the index-space displacement t relative to
the node, with displacements within 1e-9 of an integer snapped to it,
exactly as in the compiled backend: quadrature directions with rational
component ratios put points exactly on cell faces in real arithmetic, and
snapping classifies them identically in both backends.  The `nthreads`
argument is accepted for signature compatibility and ignored.
"""

from __future__ import annotations

import numpy as np

_CORNERS = (
    (0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1),
    (1, 0, 0), (1, 0, 1), (1, 1, 0), (1, 1, 1),
)


def _gather_disp(padded, i3, disp, n):
    """Trilinear values of zero-padded fields at node i3 plus displacement.

    disp (..., 3) is in index units; the gather point i3 + disp reads zero
    outside the closed cube 0 <= u_k <= n-1.  Corner indices and weights
    come from disp itself (floor and fractional part), with displacements
    within 1e-9 of an integer snapped to it, so classification matches the
    compiled backend bit for bit.
    """
    dr = np.rint(disp)
    disp = np.where(np.abs(disp - dr) < 1e-9, dr, disp)
    i3f = i3.astype(np.float64)
    inside = np.all((disp >= -i3f) & (disp <= (n - 1.0) - i3f), axis=-1)
    lo = np.floor(disp)
    fr = disp - lo
    corner = np.clip(lo.astype(np.int64) + i3, 0, n - 1)
    ix, iy, iz = corner[..., 0], corner[..., 1], corner[..., 2]
    tx, ty, tz = fr[..., 0], fr[..., 1], fr[..., 2]
    sx, sy, sz = 1.0 - tx, 1.0 - ty, 1.0 - tz
    weights = (sx * sy * sz, sx * sy * tz, sx * ty * sz, sx * ty * tz,
               tx * sy * sz, tx * sy * tz, tx * ty * sz, tx * ty * tz)
    out = []
    for field in padded:
        acc = np.zeros(ix.shape)
        for wgt, (ax, ay, az) in zip(weights, _CORNERS):
            acc += wgt * field[ix + ax, iy + ay, iz + az]
        out.append(np.where(inside, acc, 0.0))
    return out


def _pair_kernels(rho2, eps0, c0, cutoff_n):
    """Elastic and transfer kernels for squared relative speeds rho2."""
    four_eps = 4.0 * eps0
    rho = np.sqrt(rho2)
    b_el = rho.copy()
    s12 = rho2 - four_eps
    b12 = np.where(s12 > 0.0, 0.5 * c0 * np.sqrt(np.maximum(s12, 0.0)), 0.0)
    b34 = 0.5 * c0 * np.sqrt(rho2 + four_eps)
    if cutoff_n >= 0.0:
        b_el = np.minimum(b_el, cutoff_n)
        b12 = np.where(rho2 > cutoff_n * cutoff_n, 0.0, b12)
        thr = cutoff_n * cutoff_n - four_eps
        if thr < 0.0:
            b34 = np.zeros_like(b34)
        else:
            b34 = np.where(rho2 > thr, 0.0, b34)
    return b_el, b12, b34


def _index_radii(zn2, e2h):
    """Channel displacement radii in index units for squared offsets zn2."""
    rel_h = 0.5 * np.sqrt(zn2)
    rfw_h = np.sqrt(np.maximum(0.25 * zn2 - e2h, 0.0))
    rbw_h = np.sqrt(0.25 * zn2 + e2h)
    return rel_h, rfw_h, rbw_h


def _index_triples(n):
    """Integer (n^3, 3) array of grid index triples in flat C order."""
    idx = np.arange(n * n * n, dtype=np.int64)
    return np.stack(np.unravel_index(idx, (n, n, n)), axis=1)


def eval_k_core(f1, f2, nodes, r2, ball, omega, ow,
                inv_h, L, n, eps0, c0, cutoff_n,
                s_pair_max, cell_volume, nthreads):
    """Strong-form collision increments (k1, k2) on the grid."""
    n3 = f1.shape[0]
    k1 = np.zeros(n3)
    k2 = np.zeros(n3)
    nb = ball.shape[0]
    if nb == 0:
        return k1, k2
    pad = ((0, 1), (0, 1), (0, 1))
    p13 = np.pad(f1.reshape(n, n, n), pad)
    p23 = np.pad(f2.reshape(n, n, n), pad)
    idx3 = _index_triples(n)
    h = 1.0 / inv_h
    e2h = eps0 * inv_h * inv_h

    for a in range(nb):
        i = int(ball[a])
        js = ball[a:]
        js = js[r2[i] + r2[js] <= s_pair_max]
        if js.size == 0:
            continue
        i3 = idx3[i]
        z = idx3[i] - idx3[js]
        zn2 = np.einsum("kd,kd->k", z, z).astype(np.float64)
        rho2 = (h * h) * zn2
        b_el, b12, b34 = _pair_kernels(rho2, eps0, c0, cutoff_n)
        rel_h, rfw_h, rbw_h = _index_radii(zn2, e2h)

        mid = (-0.5 * z)[:, None, :]
        om = omega[None, :, :]
        a1, a2 = _gather_disp((p13, p23), i3,
                              mid + rel_h[:, None, None] * om, n)
        b1, b2 = _gather_disp((p13, p23), i3,
                              mid - rel_h[:, None, None] * om, n)
        x11 = 2.0 * np.einsum("r,kr->k", ow, a1 * b1)
        x22 = 2.0 * np.einsum("r,kr->k", ow, a2 * b2)
        x12 = np.einsum("r,kr->k", ow, a1 * b2 + a2 * b1)

        c1, c2 = _gather_disp((p13, p23), i3,
                              mid + rfw_h[:, None, None] * om, n)
        d1, d2 = _gather_disp((p13, p23), i3,
                              mid - rfw_h[:, None, None] * om, n)
        g12 = np.einsum("r,kr->k", ow, c2 * d1 + d2 * c1)

        (e1,) = _gather_disp((p13,), i3,
                             mid + rbw_h[:, None, None] * om, n)
        (g1,) = _gather_disp((p13,), i3,
                             mid - rbw_h[:, None, None] * om, n)
        g34 = 2.0 * np.einsum("r,kr->k", ow, e1 * g1)

        f1i = f1[i]
        f2i = f2[i]
        f1j = f1[js]
        f2j = f2[js]
        at_i_1 = (b_el * (x11 + x12 - f1i * (f1j + f2j))
                  + 2.0 * b12 * (g12 - f1i * f1j)
                  + b34 * (g34 - f2j * f1i))
        at_i_2 = (b_el * (x22 + x12 - f2i * (f1j + f2j))
                  + b34 * (g34 - f2i * f1j))
        at_j_1 = (b_el * (x11 + x12 - f1j * (f1i + f2i))
                  + 2.0 * b12 * (g12 - f1j * f1i)
                  + b34 * (g34 - f2i * f1j))
        at_j_2 = (b_el * (x22 + x12 - f2j * (f1i + f2i))
                  + b34 * (g34 - f2j * f1i))
        k1[i] += at_i_1.sum()
        k2[i] += at_i_2.sum()
        # element 0 is the diagonal when it survives the support filter;
        # it is counted once through the i-side update only
        if js[0] == i:
            k1[js[1:]] += at_j_1[1:]
            k2[js[1:]] += at_j_2[1:]
        else:
            k1[js] += at_j_1
            k2[js] += at_j_2

    k1 *= cell_volume
    k2 *= cell_volume
    return k1, k2


def _poly_at(coeffs, pts, rr):
    """a + b.v + c|v|^2 for coeffs (5,) at pts (..., 3) with rr = |pts|^2."""
    return coeffs[0] + pts @ coeffs[1:4] + coeffs[4] * rr


def weak_core(f1, f2, nodes, r2, ball, omega, ow,
              inv_h, L, n, eps0, c0, cutoff_n,
              s_pair_max, cell_volume, polys, nthreads):
    """Symmetrized weak moments for up to 16 quadratic test pairs."""
    nb = ball.shape[0]
    n_poly = polys.shape[0]
    if n_poly > 16:
        raise ValueError("at most 16 test pairs per call")
    if nb == 0 or n_poly == 0:
        return np.zeros(n_poly)
    partial = np.zeros((nb, n_poly))
    f13 = np.ascontiguousarray(f1.reshape(n, n, n))
    f23 = np.ascontiguousarray(f2.reshape(n, n, n))

    for a in range(nb):
        i = int(ball[a])
        js = ball[a:]
        js = js[r2[i] + r2[js] <= s_pair_max]
        if js.size == 0:
            continue
        vi = nodes[i]
        vj = nodes[js]
        c = 0.5 * (vi + vj)
        d = vi - vj
        rho2 = np.einsum("kd,kd->k", d, d)
        b_el, b12, b34 = _pair_kernels(rho2, eps0, c0, cutoff_n)
        r_el = 0.5 * np.sqrt(rho2)
        r12 = 0.5 * np.sqrt(np.maximum(rho2 - 4.0 * eps0, 0.0))
        r34 = np.sqrt(0.25 * rho2 + eps0)

        base = c[:, None, :]
        om = omega[None, :, :]
        pe = base + r_el[:, None, None] * om
        me = base - r_el[:, None, None] * om
        pq = base + r12[:, None, None] * om
        mq = base - r12[:, None, None] * om
        pt = base + r34[:, None, None] * om
        mt = base - r34[:, None, None] * om
        rr_pe = np.einsum("krd,krd->kr", pe, pe)
        rr_me = np.einsum("krd,krd->kr", me, me)
        rr_pq = np.einsum("krd,krd->kr", pq, pq)
        rr_mq = np.einsum("krd,krd->kr", mq, mq)
        rr_pt = np.einsum("krd,krd->kr", pt, pt)
        rr_mt = np.einsum("krd,krd->kr", mt, mt)

        f1i = f1[i]
        f2i = f2[i]
        f1j = f1[js]
        f2j = f2[js]
        big_t = f1i + f2i
        big_u = f1j + f2j
        diag = np.where(js == i, 0.5, 1.0)

        for p in range(n_poly):
            c1p = polys[p, 0:5]
            c2p = polys[p, 5:10]
            sa1 = np.einsum("r,kr->k", ow,
                            _poly_at(c1p, pe, rr_pe) + _poly_at(c1p, me, rr_me))
            sa2 = np.einsum("r,kr->k", ow,
                            _poly_at(c2p, pe, rr_pe) + _poly_at(c2p, me, rr_me))
            sb12 = np.einsum("r,kr->k", ow,
                             _poly_at(c2p, pq, rr_pq) + _poly_at(c2p, mq, rr_mq)
                             + _poly_at(c1p, pq, rr_pq) + _poly_at(c1p, mq, rr_mq))
            sc1 = np.einsum("r,kr->k", ow,
                            _poly_at(c1p, pt, rr_pt) + _poly_at(c1p, mt, rr_mt))
            p1i = _poly_at(c1p, vi, r2[i])
            p2i = _poly_at(c2p, vi, r2[i])
            p1j = _poly_at(c1p, vj, r2[js])
            p2j = _poly_at(c2p, vj, r2[js])
            el = b_el * (big_u * (f1i * sa1 + f2i * sa2)
                         + big_t * (f1j * sa1 + f2j * sa2)
                         - big_u * (f1i * p1i + f2i * p2i)
                         - big_t * (f1j * p1j + f2j * p2j))
            fw = 2.0 * b12 * f1i * f1j * (sb12 - p1i - p1j)
            bw = diag * b34 * (f2i * f1j * (2.0 * sc1 - p2i - p1j)
                               + f2j * f1i * (2.0 * sc1 - p2j - p1i))
            partial[a, p] = (el + fw + bw).sum()

    return partial.sum(axis=0) * (cell_volume * cell_volume)
