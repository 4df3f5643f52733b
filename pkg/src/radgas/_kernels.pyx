# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the collision operators.

Layout contract (shared with the pure python fallback in _kernels_py):

* gas fields are flat (n^3,) C-order arrays over the cube grid, last axis
  fastest, so flat index = (i0*n + i1)*n + i2;
* `omega` holds one representative per antipodal quadrature pair and `ow`
  its weight, so a full-sphere sum is recovered by visiting +/- of each
  representative;
* the support bound `s_pair_max` on r2[i]+r2[j] defines which unordered
  node pairs are evaluated (pairs above the bound contribute below
  roundoff and are skipped); `ball` is the node list matching that bound
  and is accepted for signature compatibility;
* all interpolation is trilinear with zero extension outside the closed
  cube [-L, L]^3.

Algorithm: pairs are walked by lattice offset z = (v_i - v_j)/h.  For
fixed z every pair shares the squared relative speed and the channel
kernels, and - because the pair center (v_i + v_j)/2 sits on a half
lattice whose per-axis parity is that of z - also the trilinear corner
weights of every quadrature point.  Per offset the weights, corner
offsets and admissible index windows are tabulated once, and the inner
loops reduce to contiguous eight-corner gather dots along the fastest
axis.  Fields are copied into (n+1)^3 zero-padded cubes so the
weight-zero top corner row reads an exact zero instead of needing a
branch.

For quadratic test functions the antipodal average over a channel point
pair c +/- r*w is exact: phi(c+rw) + phi(c-rw) = 2*(a + b.c +
q*(|c|^2 + r^2)), so the weak evaluator needs no quadrature loop and
uses the closed form directly.

Serial evaluation (nthreads <= 1) walks offsets in a fixed order into a
single accumulator.  Threaded evaluation gives each thread a private
accumulator over a static partition of the offset list and reduces them
in thread order, so results are reproducible for a fixed thread count.
"""

from cython.parallel import prange
from libc.math cimport sqrt, floor, ceil, fabs, round as c_round
cimport openmp

import numpy as np


cdef inline double _dot8(const double* p, const double* w8,
                         long long s1, long long s2) noexcept nogil:
    """Trilinear value from the eight corners at strides
    {0, 1, s1, s1+1, s2, s2+1, s2+s1, s2+s1+1} from p."""
    return (w8[0] * p[0] + w8[1] * p[1]
            + w8[2] * p[s1] + w8[3] * p[s1 + 1]
            + w8[4] * p[s2] + w8[5] * p[s2 + 1]
            + w8[6] * p[s2 + s1] + w8[7] * p[s2 + s1 + 1])


cdef void _el_accum(const double* f1pad, const double* f2pad,
                    long long bp, long long bm,
                    const double* wp, const double* wm,
                    long long s1, long long s2, int lo, int hi,
                    double wr, double w2,
                    double* x11, double* x22, double* x12) noexcept nogil:
    """Elastic gain sums over one line: both species at both deflection
    points, accumulated into the pair-product lines."""
    cdef int k
    cdef double la, lb, lc, ld
    for k in range(lo, hi + 1):
        la = _dot8(f1pad + bp + k, wp, s1, s2)
        lc = _dot8(f1pad + bm + k, wm, s1, s2)
        lb = _dot8(f2pad + bp + k, wp, s1, s2)
        ld = _dot8(f2pad + bm + k, wm, s1, s2)
        x11[k] += w2 * la * lc
        x22[k] += w2 * lb * ld
        x12[k] += wr * (la * ld + lb * lc)


cdef void _fw_accum(const double* f1pad, const double* f2pad,
                    long long bp, long long bm,
                    const double* wp, const double* wm,
                    long long s1, long long s2, int lo, int hi,
                    double wr, double* g12) noexcept nogil:
    """Deexcitation gain sums over one line (excited at one point times
    ground at the other, symmetrized)."""
    cdef int k
    cdef double la, lb, lc, ld
    for k in range(lo, hi + 1):
        la = _dot8(f1pad + bp + k, wp, s1, s2)
        lc = _dot8(f1pad + bm + k, wm, s1, s2)
        lb = _dot8(f2pad + bp + k, wp, s1, s2)
        ld = _dot8(f2pad + bm + k, wm, s1, s2)
        g12[k] += wr * (lb * lc + ld * la)


cdef void _bw_accum(const double* f1pad,
                    long long bp, long long bm,
                    const double* wp, const double* wm,
                    long long s1, long long s2, int lo, int hi,
                    double w2, double* g34) noexcept nogil:
    """Excitation gain sums over one line (ground state at both
    pre-collision points)."""
    cdef int k
    cdef double la, lc
    for k in range(lo, hi + 1):
        la = _dot8(f1pad + bp + k, wp, s1, s2)
        lc = _dot8(f1pad + bm + k, wm, s1, s2)
        g34[k] += w2 * la * lc


cdef inline void _build_point(double t0, double t1, double t2,
                              long long s1, long long s2, int n,
                              double* w8, long long* off,
                              int* lo3, int* hi3) noexcept nogil:
    """Tabulate one gather point with index-space offset t from node i.

    The point sits at u = i + t in index units and is inside the cube
    iff lo3[k] <= i_k <= hi3[k] per axis.  w8 receives the eight corner
    weights, off the flat padded offset of corner (0,0,0).

    Displacements within 1e-9 of an integer are snapped to it first.
    Quadrature directions with rational component ratios put points
    exactly on cell faces in real arithmetic; snapping makes their
    classification exact instead of an accident of rounding.
    """
    cdef double g
    g = c_round(t0)
    if fabs(t0 - g) < 1e-9:
        t0 = g
    g = c_round(t1)
    if fabs(t1 - g) < 1e-9:
        t1 = g
    g = c_round(t2)
    if fabs(t2 - g) < 1e-9:
        t2 = g
    cdef double f0 = floor(t0)
    cdef double f1 = floor(t1)
    cdef double f2 = floor(t2)
    cdef double r0 = t0 - f0
    cdef double r1 = t1 - f1
    cdef double r2 = t2 - f2
    cdef double s0 = 1.0 - r0
    cdef double s1f = 1.0 - r1
    cdef double s2f = 1.0 - r2
    w8[0] = s0 * s1f * s2f
    w8[1] = s0 * s1f * r2
    w8[2] = s0 * r1 * s2f
    w8[3] = s0 * r1 * r2
    w8[4] = r0 * s1f * s2f
    w8[5] = r0 * s1f * r2
    w8[6] = r0 * r1 * s2f
    w8[7] = r0 * r1 * r2
    off[0] = (<long long>f0) * s2 + (<long long>f1) * s1 + (<long long>f2)
    lo3[0] = <int>ceil(-t0)
    lo3[1] = <int>ceil(-t1)
    lo3[2] = <int>ceil(-t2)
    hi3[0] = <int>floor((n - 1) - t0)
    hi3[1] = <int>floor((n - 1) - t1)
    hi3[2] = <int>floor((n - 1) - t2)


cdef void _strong_offset(int z0, int z1, int z2,
                         const double* f1pad, const double* f2pad,
                         const double* r2flat,
                         int n, long long s1, long long s2,
                         double h, double eps0, double c0, double cutoff_n,
                         double s_pair_max,
                         const double* om, const double* ow, int nr,
                         double* k1buf, double* k2buf) noexcept nogil:
    """Accumulate strong-form increments of every pair with offset z."""
    cdef bint diag = z0 == 0 and z1 == 0 and z2 == 0
    cdef double zn2 = <double>(z0 * z0 + z1 * z1 + z2 * z2)
    cdef double rho2 = h * h * zn2
    cdef double rho = sqrt(rho2)
    cdef double four_eps = 4.0 * eps0
    cdef double b_el = 0.0, b12 = 0.0, b34 = 0.0, thr
    if not diag:
        b_el = rho
        if cutoff_n >= 0.0 and b_el > cutoff_n:
            b_el = cutoff_n
    if rho2 > four_eps:
        b12 = 0.5 * c0 * sqrt(rho2 - four_eps)
        if cutoff_n >= 0.0 and rho2 > cutoff_n * cutoff_n:
            b12 = 0.0
    b34 = 0.5 * c0 * sqrt(rho2 + four_eps)
    if cutoff_n >= 0.0:
        thr = cutoff_n * cutoff_n - four_eps
        if thr < 0.0 or rho2 > thr:
            b34 = 0.0
    if b_el == 0.0 and b12 == 0.0 and b34 == 0.0:
        return

    cdef double e2h = eps0 / (h * h)
    cdef double rel_h = 0.5 * sqrt(zn2)
    cdef double rfw_h = 0.0
    cdef double rbw_h = sqrt(0.25 * zn2 + e2h)
    cdef bint el_on = b_el > 0.0
    cdef bint fw_on = b12 > 0.0
    cdef bint bw_on = b34 > 0.0
    if fw_on:
        rfw_h = sqrt(0.25 * zn2 - e2h)

    # per (representative, point) tables; points 0/1 = elastic +/-,
    # 2/3 = forward transfer +/-, 4/5 = backward transfer +/-
    cdef double wt[64][6][8]
    cdef long long off[64][6]
    cdef int plo[64][6][3]
    cdef int phi[64][6][3]
    # per (representative, channel) windows: intersection of the +/-
    # point windows, since a channel always gathers both points
    cdef int cvlo[64][3][3]
    cdef int cvhi[64][3][3]
    cdef int r, c, ax
    cdef double hz0 = 0.5 * z0
    cdef double hz1 = 0.5 * z1
    cdef double hz2 = 0.5 * z2
    for r in range(nr):
        if el_on:
            _build_point(-hz0 + rel_h * om[3 * r], -hz1 + rel_h * om[3 * r + 1],
                         -hz2 + rel_h * om[3 * r + 2], s1, s2, n,
                         &wt[r][0][0], &off[r][0], &plo[r][0][0], &phi[r][0][0])
            _build_point(-hz0 - rel_h * om[3 * r], -hz1 - rel_h * om[3 * r + 1],
                         -hz2 - rel_h * om[3 * r + 2], s1, s2, n,
                         &wt[r][1][0], &off[r][1], &plo[r][1][0], &phi[r][1][0])
        if fw_on:
            _build_point(-hz0 + rfw_h * om[3 * r], -hz1 + rfw_h * om[3 * r + 1],
                         -hz2 + rfw_h * om[3 * r + 2], s1, s2, n,
                         &wt[r][2][0], &off[r][2], &plo[r][2][0], &phi[r][2][0])
            _build_point(-hz0 - rfw_h * om[3 * r], -hz1 - rfw_h * om[3 * r + 1],
                         -hz2 - rfw_h * om[3 * r + 2], s1, s2, n,
                         &wt[r][3][0], &off[r][3], &plo[r][3][0], &phi[r][3][0])
        if bw_on:
            _build_point(-hz0 + rbw_h * om[3 * r], -hz1 + rbw_h * om[3 * r + 1],
                         -hz2 + rbw_h * om[3 * r + 2], s1, s2, n,
                         &wt[r][4][0], &off[r][4], &plo[r][4][0], &phi[r][4][0])
            _build_point(-hz0 - rbw_h * om[3 * r], -hz1 - rbw_h * om[3 * r + 1],
                         -hz2 - rbw_h * om[3 * r + 2], s1, s2, n,
                         &wt[r][5][0], &off[r][5], &plo[r][5][0], &phi[r][5][0])
        for c in range(3):
            if (c == 0 and not el_on) or (c == 1 and not fw_on) \
                    or (c == 2 and not bw_on):
                continue
            for ax in range(3):
                cvlo[r][c][ax] = (plo[r][2 * c][ax]
                                  if plo[r][2 * c][ax] > plo[r][2 * c + 1][ax]
                                  else plo[r][2 * c + 1][ax])
                cvhi[r][c][ax] = (phi[r][2 * c][ax]
                                  if phi[r][2 * c][ax] < phi[r][2 * c + 1][ax]
                                  else phi[r][2 * c + 1][ax])

    # box of i such that both i and j = i - z lie inside the cube
    cdef int blo0 = z0 if z0 > 0 else 0
    cdef int bhi0 = n - 1 + (z0 if z0 < 0 else 0)
    cdef int blo1 = z1 if z1 > 0 else 0
    cdef int bhi1 = n - 1 + (z1 if z1 < 0 else 0)
    cdef int blo2 = z2 if z2 > 0 else 0
    cdef int bhi2 = n - 1 + (z2 if z2 < 0 else 0)

    cdef double x11[64]
    cdef double x22[64]
    cdef double x12[64]
    cdef double g12[64]
    cdef double g34[64]
    cdef unsigned long long mask, bit
    cdef int i0, i1, i2, j0, j1, first, last, lo, hi
    cdef long long rowi, rowj, pi, pj
    cdef double w2, wr, f1i, f2i, f1j, f2j, gi, com1, com2
    cdef double b12_2 = 2.0 * b12

    for i0 in range(blo0, bhi0 + 1):
        j0 = i0 - z0
        for i1 in range(blo1, bhi1 + 1):
            j1 = i1 - z1
            rowi = (<long long>i0) * s2 + i1 * s1
            rowj = (<long long>j0) * s2 + j1 * s1
            # admissible i2 set by the exact support test, kept as a bitmask
            mask = 0
            first = -1
            last = -1
            for i2 in range(blo2, bhi2 + 1):
                if (r2flat[(<long long>i0 * n + i1) * n + i2]
                        + r2flat[(<long long>j0 * n + j1) * n + i2 - z2]
                        <= s_pair_max):
                    mask |= (<unsigned long long>1) << i2
                    if first < 0:
                        first = i2
                    last = i2
            if first < 0:
                continue
            for i2 in range(first, last + 1):
                x11[i2] = 0.0
                x22[i2] = 0.0
                x12[i2] = 0.0
                g12[i2] = 0.0
                g34[i2] = 0.0
            for r in range(nr):
                wr = ow[r]
                w2 = 2.0 * wr
                if el_on and (cvlo[r][0][0] <= i0 <= cvhi[r][0][0]
                              and cvlo[r][0][1] <= i1 <= cvhi[r][0][1]):
                    lo = cvlo[r][0][2]
                    if lo < first: lo = first
                    hi = cvhi[r][0][2]
                    if hi > last: hi = last
                    if lo <= hi:
                        _el_accum(f1pad, f2pad,
                                  rowi + off[r][0], rowi + off[r][1],
                                  &wt[r][0][0], &wt[r][1][0],
                                  s1, s2, lo, hi, wr, w2, x11, x22, x12)
                if fw_on and (cvlo[r][1][0] <= i0 <= cvhi[r][1][0]
                              and cvlo[r][1][1] <= i1 <= cvhi[r][1][1]):
                    lo = cvlo[r][1][2]
                    if lo < first: lo = first
                    hi = cvhi[r][1][2]
                    if hi > last: hi = last
                    if lo <= hi:
                        _fw_accum(f1pad, f2pad,
                                  rowi + off[r][2], rowi + off[r][3],
                                  &wt[r][2][0], &wt[r][3][0],
                                  s1, s2, lo, hi, wr, g12)
                if bw_on and (cvlo[r][2][0] <= i0 <= cvhi[r][2][0]
                              and cvlo[r][2][1] <= i1 <= cvhi[r][2][1]):
                    lo = cvlo[r][2][2]
                    if lo < first: lo = first
                    hi = cvhi[r][2][2]
                    if hi > last: hi = last
                    if lo <= hi:
                        _bw_accum(f1pad,
                                  rowi + off[r][4], rowi + off[r][5],
                                  &wt[r][4][0], &wt[r][5][0],
                                  s1, s2, lo, hi, w2, g34)
            # update pass over admissible pairs of this row
            bit = (<unsigned long long>1) << first
            for i2 in range(first, last + 1):
                if mask & bit:
                    pi = rowi + i2
                    pj = rowj + i2 - z2
                    f1i = f1pad[pi]
                    f2i = f2pad[pi]
                    f1j = f1pad[pj]
                    f2j = f2pad[pj]
                    if diag:
                        gi = b34 * (g34[i2] - f2i * f1i)
                        k1buf[pi] += gi
                        k2buf[pi] += gi
                    else:
                        com1 = x11[i2] + x12[i2]
                        com2 = x22[i2] + x12[i2]
                        k1buf[pi] += (b_el * (com1 - f1i * (f1j + f2j))
                                      + b12_2 * (g12[i2] - f1i * f1j)
                                      + b34 * (g34[i2] - f2j * f1i))
                        k2buf[pi] += (b_el * (com2 - f2i * (f1j + f2j))
                                      + b34 * (g34[i2] - f2i * f1j))
                        k1buf[pj] += (b_el * (com1 - f1j * (f1i + f2i))
                                      + b12_2 * (g12[i2] - f1j * f1i)
                                      + b34 * (g34[i2] - f2i * f1j))
                        k2buf[pj] += (b_el * (com2 - f2j * (f1i + f2i))
                                      + b34 * (g34[i2] - f2j * f1i))
                bit <<= 1


cdef void _weak_offset(int z0, int z1, int z2,
                       const double* f1pad, const double* f2pad,
                       const double* axis, const double* r2flat,
                       int n, long long s1, long long s2,
                       double h, double eps0, double c0, double cutoff_n,
                       double s_pair_max, double sw2,
                       const double* pc, int n_poly,
                       double* acc) noexcept nogil:
    """Accumulate weak-form pair sums for offset z into acc[0:n_poly].

    pc holds per test pair the ten coefficients (a1, b1, q1, a2, b2, q2)
    flattened as rows of length 10.  sw2 is twice the representative
    weight sum, so sw2 * (a + b.c + q*(|c|^2 + r^2)) is the antipodal
    angular sum of one quadratic over one channel radius.
    """
    cdef bint diag = z0 == 0 and z1 == 0 and z2 == 0
    cdef double zn2 = <double>(z0 * z0 + z1 * z1 + z2 * z2)
    cdef double rho2 = h * h * zn2
    cdef double rho = sqrt(rho2)
    cdef double four_eps = 4.0 * eps0
    cdef double b_el = 0.0, b12 = 0.0, b34 = 0.0, thr
    if not diag:
        b_el = rho
        if cutoff_n >= 0.0 and b_el > cutoff_n:
            b_el = cutoff_n
    if rho2 > four_eps:
        b12 = 0.5 * c0 * sqrt(rho2 - four_eps)
        if cutoff_n >= 0.0 and rho2 > cutoff_n * cutoff_n:
            b12 = 0.0
    b34 = 0.5 * c0 * sqrt(rho2 + four_eps)
    if cutoff_n >= 0.0:
        thr = cutoff_n * cutoff_n - four_eps
        if thr < 0.0 or rho2 > thr:
            b34 = 0.0
    if b_el == 0.0 and b12 == 0.0 and b34 == 0.0:
        return
    cdef double rel2 = 0.25 * rho2
    cdef double rfw2 = 0.25 * rho2 - eps0
    cdef double rbw2 = 0.25 * rho2 + eps0
    cdef double b12_2 = 2.0 * b12

    cdef int blo0 = z0 if z0 > 0 else 0
    cdef int bhi0 = n - 1 + (z0 if z0 < 0 else 0)
    cdef int blo1 = z1 if z1 > 0 else 0
    cdef int bhi1 = n - 1 + (z1 if z1 < 0 else 0)
    cdef int blo2 = z2 if z2 > 0 else 0
    cdef int bhi2 = n - 1 + (z2 if z2 < 0 else 0)

    cdef int i0, i1, i2, j0, j1, p
    cdef long long rowi, rowj, fi, fj, pi, pj
    cdef double cx, cy, cz, c2, r2i, r2j, vx, vy, vz, ux, uy, uz
    cdef double f1i, f2i, f1j, f2j, bt, bu
    cdef double sa1, sa2, sb12, sc1, p1i, p2i, p1j, p2j, el, fw, bw
    cdef const double* q

    for i0 in range(blo0, bhi0 + 1):
        j0 = i0 - z0
        for i1 in range(blo1, bhi1 + 1):
            j1 = i1 - z1
            rowi = (<long long>i0) * s2 + i1 * s1
            rowj = (<long long>j0) * s2 + j1 * s1
            for i2 in range(blo2, bhi2 + 1):
                fi = (<long long>i0 * n + i1) * n + i2
                fj = (<long long>j0 * n + j1) * n + i2 - z2
                r2i = r2flat[fi]
                r2j = r2flat[fj]
                if r2i + r2j > s_pair_max:
                    continue
                pi = rowi + i2
                pj = rowj + i2 - z2
                f1i = f1pad[pi]
                f2i = f2pad[pi]
                f1j = f1pad[pj]
                f2j = f2pad[pj]
                if f1i == 0.0 and f2i == 0.0 and f1j == 0.0 and f2j == 0.0:
                    continue
                vx = axis[i0]
                vy = axis[i1]
                vz = axis[i2]
                ux = axis[j0]
                uy = axis[j1]
                uz = axis[i2 - z2]
                cx = 0.5 * (vx + ux)
                cy = 0.5 * (vy + uy)
                cz = 0.5 * (vz + uz)
                c2 = cx * cx + cy * cy + cz * cz
                bt = f1i + f2i
                bu = f1j + f2j
                for p in range(n_poly):
                    q = pc + 10 * p
                    p1i = q[0] + q[1] * vx + q[2] * vy + q[3] * vz + q[4] * r2i
                    p2i = q[5] + q[6] * vx + q[7] * vy + q[8] * vz + q[9] * r2i
                    p1j = q[0] + q[1] * ux + q[2] * uy + q[3] * uz + q[4] * r2j
                    p2j = q[5] + q[6] * ux + q[7] * uy + q[8] * uz + q[9] * r2j
                    if diag:
                        sc1 = sw2 * (q[0] + q[1] * cx + q[2] * cy + q[3] * cz
                                     + q[4] * (c2 + rbw2))
                        acc[p] += b34 * f2i * f1i * (2.0 * sc1 - p2i - p1i)
                        continue
                    el = 0.0
                    if b_el > 0.0:
                        sa1 = sw2 * (q[0] + q[1] * cx + q[2] * cy + q[3] * cz
                                     + q[4] * (c2 + rel2))
                        sa2 = sw2 * (q[5] + q[6] * cx + q[7] * cy + q[8] * cz
                                     + q[9] * (c2 + rel2))
                        el = b_el * (bu * (f1i * sa1 + f2i * sa2)
                                     + bt * (f1j * sa1 + f2j * sa2)
                                     - bu * (f1i * p1i + f2i * p2i)
                                     - bt * (f1j * p1j + f2j * p2j))
                    fw = 0.0
                    if b12 > 0.0:
                        sb12 = sw2 * ((q[0] + q[5]) + (q[1] + q[6]) * cx
                                      + (q[2] + q[7]) * cy + (q[3] + q[8]) * cz
                                      + (q[4] + q[9]) * (c2 + rfw2))
                        fw = b12_2 * f1i * f1j * (sb12 - p1i - p1j)
                    bw = 0.0
                    if b34 > 0.0:
                        sc1 = sw2 * (q[0] + q[1] * cx + q[2] * cy + q[3] * cz
                                     + q[4] * (c2 + rbw2))
                        bw = b34 * (f2i * f1j * (2.0 * sc1 - p2i - p1j)
                                    + f2j * f1i * (2.0 * sc1 - p2j - p1i))
                    acc[p] += el + fw + bw


def _offset_list(int n, double h, double s_pair_max):
    """Half-space lattice offsets with any admissible pair, plus (0,0,0).

    The diagonal offset comes first; the rest follow in a fixed
    lexicographic order.  Offsets whose squared relative speed exceeds
    2*s_pair_max cannot satisfy r2[i]+r2[j] <= s_pair_max and are
    pruned, as is everything when the bound is negative (empty support).
    """
    if s_pair_max < 0.0:
        return np.zeros((0, 3), dtype=np.int32)
    cdef int m = n - 1
    rng = np.arange(-m, m + 1, dtype=np.int32)
    z0, z1, z2 = np.meshgrid(np.arange(0, m + 1, dtype=np.int32), rng, rng,
                             indexing="ij")
    z0 = z0.ravel()
    z1 = z1.ravel()
    z2 = z2.ravel()
    half = (z0 > 0) | ((z0 == 0) & ((z1 > 0) | ((z1 == 0) & (z2 > 0))))
    zn2 = (z0.astype(np.float64) ** 2 + z1.astype(np.float64) ** 2
           + z2.astype(np.float64) ** 2)
    keep = half & (h * h * zn2 <= 2.0 * s_pair_max)
    zs = np.stack([z0[keep], z1[keep], z2[keep]], axis=1)
    zs = np.concatenate([np.zeros((1, 3), dtype=np.int32), zs], axis=0)
    return np.ascontiguousarray(zs)


def _pad_field(f, int n):
    cdef int s = n + 1
    out = np.zeros((s, s, s))
    out[:n, :n, :n] = np.asarray(f).reshape(n, n, n)
    return out.ravel()


def eval_k_core(const double[::1] f1, const double[::1] f2,
                const double[:, ::1] nodes, const double[::1] r2,
                const long long[::1] ball,
                const double[:, ::1] omega, const double[::1] ow,
                double inv_h, double L, int n, double eps0, double c0,
                double cutoff_n, double s_pair_max, double cell_volume,
                int nthreads):
    """Strong-form collision increments (k1, k2) on the grid."""
    cdef int nr = omega.shape[0]
    if nr > 64:
        raise ValueError("at most 64 antipodal representatives per call")
    if n > 63:
        raise ValueError("grid axis too long for the compiled backend")
    cdef double h = 1.0 / inv_h
    zs_obj = _offset_list(n, h, s_pair_max)
    cdef const int[:, ::1] zs = zs_obj
    cdef int nz = zs.shape[0]
    out1 = np.zeros(n * n * n)
    out2 = np.zeros(n * n * n)
    if nz == 0:
        return out1, out2

    f1pad_obj = _pad_field(f1, n)
    f2pad_obj = _pad_field(f2, n)
    cdef const double[::1] f1pad = f1pad_obj
    cdef const double[::1] f2pad = f2pad_obj
    cdef long long s1 = n + 1
    cdef long long s2 = s1 * s1
    cdef long long npad = s2 * s1

    cdef int nt = nthreads if nthreads > 1 else 1
    buf1_obj = np.zeros((nt, npad))
    buf2_obj = np.zeros((nt, npad))
    cdef double[:, ::1] k1buf = buf1_obj
    cdef double[:, ::1] k2buf = buf2_obj

    cdef int iz, tid
    if nt == 1:
        with nogil:
            for iz in range(nz):
                _strong_offset(zs[iz, 0], zs[iz, 1], zs[iz, 2],
                               &f1pad[0], &f2pad[0], &r2[0],
                               n, s1, s2, h, eps0, c0, cutoff_n, s_pair_max,
                               &omega[0, 0], &ow[0], nr,
                               &k1buf[0, 0], &k2buf[0, 0])
    else:
        with nogil:
            for iz in prange(nz, num_threads=nt, schedule="static"):
                tid = openmp.omp_get_thread_num()
                _strong_offset(zs[iz, 0], zs[iz, 1], zs[iz, 2],
                               &f1pad[0], &f2pad[0], &r2[0],
                               n, s1, s2, h, eps0, c0, cutoff_n, s_pair_max,
                               &omega[0, 0], &ow[0], nr,
                               &k1buf[tid, 0], &k2buf[tid, 0])

    tot1 = np.asarray(buf1_obj)[0]
    tot2 = np.asarray(buf2_obj)[0]
    for tid in range(1, nt):
        tot1 = tot1 + np.asarray(buf1_obj)[tid]
        tot2 = tot2 + np.asarray(buf2_obj)[tid]
    out1[:] = tot1.reshape(n + 1, n + 1, n + 1)[:n, :n, :n].ravel() * cell_volume
    out2[:] = tot2.reshape(n + 1, n + 1, n + 1)[:n, :n, :n].ravel() * cell_volume
    return out1, out2


def weak_core(const double[::1] f1, const double[::1] f2,
              const double[:, ::1] nodes, const double[::1] r2,
              const long long[::1] ball,
              const double[:, ::1] omega, const double[::1] ow,
              double inv_h, double L, int n, double eps0, double c0,
              double cutoff_n, double s_pair_max, double cell_volume,
              const double[:, ::1] polys, int nthreads):
    """Symmetrized weak moments for up to 16 quadratic test pairs."""
    cdef int n_poly = polys.shape[0]
    if n_poly > 16:
        raise ValueError("at most 16 test pairs per call")
    out = np.zeros(n_poly)
    if n_poly == 0:
        return out
    cdef int nr = omega.shape[0]
    cdef double h = 1.0 / inv_h
    zs_obj = _offset_list(n, h, s_pair_max)
    cdef const int[:, ::1] zs = zs_obj
    cdef int nz = zs.shape[0]
    if nz == 0:
        return out

    f1pad_obj = _pad_field(f1, n)
    f2pad_obj = _pad_field(f2, n)
    axis_obj = np.ascontiguousarray(np.asarray(nodes)[:n, 2])
    cdef const double[::1] f1pad = f1pad_obj
    cdef const double[::1] f2pad = f2pad_obj
    cdef const double[::1] axis = axis_obj
    cdef long long s1 = n + 1
    cdef long long s2 = s1 * s1

    cdef double sw2 = 0.0
    cdef int r
    for r in range(nr):
        sw2 += ow[r]
    sw2 *= 2.0

    cdef const double[:, ::1] pc = polys
    cdef int nt = nthreads if nthreads > 1 else 1
    acc_obj = np.zeros((nt, 16))
    cdef double[:, ::1] acc = acc_obj
    cdef int iz, tid
    if nt == 1:
        with nogil:
            for iz in range(nz):
                _weak_offset(zs[iz, 0], zs[iz, 1], zs[iz, 2],
                             &f1pad[0], &f2pad[0], &axis[0], &r2[0],
                             n, s1, s2, h, eps0, c0, cutoff_n, s_pair_max,
                             sw2, &pc[0, 0], n_poly, &acc[0, 0])
    else:
        with nogil:
            for iz in prange(nz, num_threads=nt, schedule="static"):
                tid = openmp.omp_get_thread_num()
                _weak_offset(zs[iz, 0], zs[iz, 1], zs[iz, 2],
                             &f1pad[0], &f2pad[0], &axis[0], &r2[0],
                             n, s1, s2, h, eps0, c0, cutoff_n, s_pair_max,
                             sw2, &pc[0, 0], n_poly, &acc[0, 0])

    total = np.asarray(acc_obj)[0]
    for tid in range(1, nt):
        total = total + np.asarray(acc_obj)[tid]
    out[:] = total[:n_poly] * (cell_volume * cell_volume)
    return out
