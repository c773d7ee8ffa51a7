"""Hot numerical kernels with two build lanes.

The default lane compiles the kernels with numba (nopython, cached).
Setting the environment variable TUNNELSADDLE_NO_NUMBA to any non-empty
value selects a plain-Python/NumPy lane with identical semantics: the
path integrator runs the same source uncompiled, and the Crank-Nicolson
step uses a prefactorized LAPACK tridiagonal solve instead of the hand
Thomas sweep. Both lanes are exercised by the test suite; the benchmark
script compares them head to head.

Kernels:
  advance_path  adaptive Dormand-Prince 5(4) for zddot = -V'(z) with a
                co-integrated Lagrangian accumulator and an optional
                inverse chart w = 1/z that keeps pole passages of the
                quartic well regular
  cycle_sums    branch-tracked trapezoid sums of v dz and dz/v on a circle
  cn_evolve     Crank-Nicolson evolution with constant tridiagonal factors
"""

import os

import numpy as np

USE_NUMBA = not os.environ.get("TUNNELSADDLE_NO_NUMBA", "")

# status codes of advance_path
REACHED_END = 0
ESCAPED = 1
BUFFER_FULL = 2
STEP_UNDERFLOW = 3


def _build(use_numba):
    if use_numba:
        import numba
        jit = numba.njit(cache=True, fastmath=False, nogil=True)
    else:
        def jit(f):
            return f

    @jit
    def _pv(c, z):
        """Horner evaluation, ascending coefficients, complex scalar."""
        r = 0.0j
        for i in range(len(c) - 1, -1, -1):
            r = r * z + c[i]
        return r

    @jit
    def _phi(w, s):
        """Chart antiderivative of the quartic-well Lagrangian.

        Along the inverse-chart flow the physical Lagrangian splits as
        L = dPhi/dt + (eps/3)(1 - 4 w^2) with Phi = -s/(3 w^3) +
        2 s/(3 w), so the accumulator can integrate the small smooth
        remainder and add Phi back at sample time. Phi is O(1) at the
        chart boundary, so hand-offs carry no cancellation.
        """
        return s * (2.0 - 1.0 / (w * w)) / (3.0 * w)

    @jit
    def _rhs(mode, dvc, vc, eps, p, q):
        """Stage derivatives (p', q', A') in the active chart.

        Chart 0 is physical: p = z, q = v, and A' is the Lagrangian
        q^2/2 - V(p). Chart 1 is the inverse chart of the quartic well:
        p = w = 1/z, q = s = w', where w'' = -w + 4 eps w^3 is regular
        through pole passages and A' is the Lagrangian remainder after
        the exact dPhi/dt split.
        """
        if mode == 0:
            return q, -_pv(dvc, p), 0.5 * q * q - _pv(vc, p)
        return q, -p + 4.0 * eps * p * p * p, \
            (eps / 3.0) * (1.0 - 4.0 * p * p)

    @jit
    def advance_path(dvc, vc, z0, v0, t_end, rtol, atol, max_step,
                     escape_sq, dual_r, ts, zs, vs, As):
        """Integrate z'' = -V'(z) from t=0 with state (z, v, A).

        A accumulates the Lagrangian v^2/2 - V(z) alongside the motion
        and is excluded from error control. Accepted steps are written
        to the buffers from index 0. Returns (count, status).

        With dual_r > 0 (canonical quartic well only) the state moves
        to the inverse chart w = 1/z, s = -v w^2 whenever |z| grows
        past dual_r and returns below 0.93 dual_r. Pole passages are
        regular there and escape detection is suspended, so arbitrarily
        tall outward excursions integrate at ordinary cost. Samples are
        always written in physical variables with the action corrected
        by the chart antiderivative, so the buffers look the same to
        the caller; the step cap 0.5 |w| + 1e-3 keeps samples dense
        enough around each pole for downstream phase unwrapping.
        """
        a21 = 1.0 / 5.0
        a31, a32 = 3.0 / 40.0, 9.0 / 40.0
        a41, a42, a43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
        a51, a52, a53, a54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                              64448.0 / 6561.0, -212.0 / 729.0)
        a61, a62, a63, a64, a65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                   46732.0 / 5247.0, 49.0 / 176.0,
                                   -5103.0 / 18656.0)
        b1, b3, b4, b5, b6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                              -2187.0 / 6784.0, 11.0 / 84.0)
        e1, e3, e4, e5, e6, e7 = (71.0 / 57600.0, -71.0 / 16695.0,
                                  71.0 / 1920.0, -17253.0 / 339200.0,
                                  22.0 / 525.0, -1.0 / 40.0)
        safety, alpha, beta = 0.9, 0.14, 0.08

        # conserved energy, needed only by the inverse chart
        eps = 0.5 * v0 * v0 + _pv(vc, z0)
        enter_sq = dual_r * dual_r
        rex = 0.93 * dual_r
        exit_sq = rex * rex

        cap = len(ts)
        t = 0.0
        z = z0
        v = v0
        A = 0.0j
        mode = 0
        ts[0] = t
        zs[0] = z
        vs[0] = v
        As[0] = A
        cnt = 1

        if dual_r > 0.0 and z.real * z.real + z.imag * z.imag > enter_sq:
            w = 1.0 / z
            s = -v * w * w
            A = A - _phi(w, s)
            z = w
            v = s
            mode = 1

        # FSAL seed, recomputed at every chart switch
        k1z, k1v, k1a = _rhs(mode, dvc, vc, eps, z, v)

        h = max_step if max_step < 1e-2 else 1e-2
        if h > t_end:
            h = t_end
        err_prev = 1.0
        hmin = 1e-13 * (t_end if t_end > 1.0 else 1.0)

        while t < t_end:
            if mode == 1:
                hc = 0.5 * abs(z) + 1e-3
                if h > hc:
                    h = hc
            if t + h > t_end:
                h = t_end - t

            z2 = z + h * (a21 * k1z)
            v2 = v + h * (a21 * k1v)
            k2z, k2v, k2a = _rhs(mode, dvc, vc, eps, z2, v2)

            z3 = z + h * (a31 * k1z + a32 * k2z)
            v3 = v + h * (a31 * k1v + a32 * k2v)
            k3z, k3v, k3a = _rhs(mode, dvc, vc, eps, z3, v3)

            z4 = z + h * (a41 * k1z + a42 * k2z + a43 * k3z)
            v4 = v + h * (a41 * k1v + a42 * k2v + a43 * k3v)
            k4z, k4v, k4a = _rhs(mode, dvc, vc, eps, z4, v4)

            z5 = z + h * (a51 * k1z + a52 * k2z + a53 * k3z + a54 * k4z)
            v5 = v + h * (a51 * k1v + a52 * k2v + a53 * k3v + a54 * k4v)
            k5z, k5v, k5a = _rhs(mode, dvc, vc, eps, z5, v5)

            z6 = z + h * (a61 * k1z + a62 * k2z + a63 * k3z + a64 * k4z +
                          a65 * k5z)
            v6 = v + h * (a61 * k1v + a62 * k2v + a63 * k3v + a64 * k4v +
                          a65 * k5v)
            k6z, k6v, k6a = _rhs(mode, dvc, vc, eps, z6, v6)

            zn = z + h * (b1 * k1z + b3 * k3z + b4 * k4z + b5 * k5z +
                          b6 * k6z)
            vn = v + h * (b1 * k1v + b3 * k3v + b4 * k4v + b5 * k5v +
                          b6 * k6v)
            An = A + h * (b1 * k1a + b3 * k3a + b4 * k4a + b5 * k5a +
                          b6 * k6a)
            k7z, k7v, k7a = _rhs(mode, dvc, vc, eps, zn, vn)

            ez = h * (e1 * k1z + e3 * k3z + e4 * k4z + e5 * k5z +
                      e6 * k6z + e7 * k7z)
            ev = h * (e1 * k1v + e3 * k3v + e4 * k4v + e5 * k5v +
                      e6 * k6v + e7 * k7v)
            az = abs(z) if abs(z) > abs(zn) else abs(zn)
            av = abs(v) if abs(v) > abs(vn) else abs(vn)
            scz = atol + rtol * az
            scv = atol + rtol * av
            err = np.sqrt(0.5 * ((abs(ez) / scz) ** 2 +
                                 (abs(ev) / scv) ** 2))

            if err <= 1.0:
                t = t + h
                z = zn
                v = vn
                A = An
                k1z, k1v, k1a = k7z, k7v, k7a
                ts[cnt] = t
                if mode == 0:
                    zs[cnt] = z
                    vs[cnt] = v
                    As[cnt] = A
                elif z.real != 0.0 or z.imag != 0.0:
                    zi = 1.0 / z
                    zs[cnt] = zi
                    vs[cnt] = -v * zi * zi
                    As[cnt] = A + _phi(z, v)
                else:
                    # exact pole hit; flag the sample, the state is fine
                    zs[cnt] = complex(1e300, 0.0)
                    vs[cnt] = complex(1e300, 0.0)
                    As[cnt] = complex(1e300, 0.0)
                cnt += 1
                if mode == 0:
                    r2 = z.real * z.real + z.imag * z.imag
                    if dual_r > 0.0 and r2 > enter_sq:
                        w = 1.0 / z
                        s = -v * w * w
                        A = A - _phi(w, s)
                        z = w
                        v = s
                        mode = 1
                        k1z, k1v, k1a = _rhs(mode, dvc, vc, eps, z, v)
                        err_prev = 1.0
                    elif r2 > escape_sq:
                        return cnt, ESCAPED
                else:
                    if (z.real * z.real + z.imag * z.imag) * exit_sq > 1.0:
                        A = A + _phi(z, v)
                        zi = 1.0 / z
                        v = -v * zi * zi
                        z = zi
                        mode = 0
                        k1z, k1v, k1a = _rhs(mode, dvc, vc, eps, z, v)
                        err_prev = 1.0
                if cnt >= cap:
                    return cnt, BUFFER_FULL
                if err == 0.0:
                    fac = 10.0
                else:
                    fac = safety * err ** (-alpha) * err_prev ** beta
                if fac > 10.0:
                    fac = 10.0
                if fac < 0.2:
                    fac = 0.2
                err_prev = err
                h = h * fac
                if h > max_step:
                    h = max_step
            else:
                fac = safety * err ** (-0.2)
                if fac < 0.2:
                    fac = 0.2
                if fac > 1.0:
                    fac = 1.0
                h = h * fac
            if h < hmin:
                return cnt, STEP_UNDERFLOW
        return cnt, REACHED_END

    @jit
    def cycle_sums(wc, cx, cy, R, M):
        """Branch-tracked trapezoid sums on the circle center (cx, cy).

        Returns (I, T, closure) with I = sum v dz, T = sum dz/v over M
        uniform nodes, v a continuous branch of sqrt(polyval(wc, z)),
        and closure the relative mismatch of the branch after a full
        loop (nonzero means odd monodromy: the circle crosses a cut).
        """
        c = cx + 1j * cy
        dth = 2.0 * np.pi / M
        I = 0.0j
        T = 0.0j
        z0 = c + R
        v0 = np.sqrt(_pv(wc, z0))
        v = v0
        for k in range(M):
            th = dth * k
            e = np.cos(th) + 1j * np.sin(th)
            zk = c + R * e
            vraw = np.sqrt(_pv(wc, zk))
            if abs(vraw - v) > abs(vraw + v):
                vraw = -vraw
            v = vraw
            dz = 1j * R * e * dth
            I += v * dz
            T += dz / v
        # close the loop back to theta = 2 pi
        vraw = np.sqrt(_pv(wc, z0))
        if abs(vraw - v) > abs(vraw + v):
            vraw = -vraw
        closure = abs(vraw - v0) / abs(v0)
        return I, T, closure

    if use_numba:
        @jit
        def _cn_loop(Al, cp, inv_den, Bl, Bd, Bu, psi, nsteps, rec,
                     dx, hbar, idx1, idx2, out):
            N = len(psi)
            d = np.empty(N, dtype=np.complex128)
            row = 0
            for s in range(nsteps):
                d[0] = Bd[0] * psi[0] + Bu[0] * psi[1]
                for i in range(1, N - 1):
                    d[i] = (Bl[i] * psi[i - 1] + Bd[i] * psi[i] +
                            Bu[i] * psi[i + 1])
                d[N - 1] = Bl[N - 1] * psi[N - 2] + Bd[N - 1] * psi[N - 1]

                d[0] = d[0] * inv_den[0]
                for i in range(1, N):
                    d[i] = (d[i] - Al[i] * d[i - 1]) * inv_den[i]
                psi[N - 1] = d[N - 1]
                for i in range(N - 2, -1, -1):
                    psi[i] = d[i] - cp[i] * psi[i + 1]

                if (s + 1) % rec == 0 and row < len(out):
                    p1 = 0.0
                    for i in range(idx1 + 1):
                        p1 += (psi[i].real ** 2 + psi[i].imag ** 2)
                    p2 = p1
                    for i in range(idx1 + 1, idx2 + 1):
                        p2 += (psi[i].real ** 2 + psi[i].imag ** 2)
                    nrm = p2
                    for i in range(idx2 + 1, N):
                        nrm += (psi[i].real ** 2 + psi[i].imag ** 2)
                    j1 = hbar * (np.conj(psi[idx1]) *
                                 (psi[idx1 + 1] - psi[idx1 - 1])).imag / (
                                     2.0 * dx)
                    j2 = hbar * (np.conj(psi[idx2]) *
                                 (psi[idx2 + 1] - psi[idx2 - 1])).imag / (
                                     2.0 * dx)
                    out[row, 0] = p1 * dx
                    out[row, 1] = p2 * dx
                    out[row, 2] = j1
                    out[row, 3] = j2
                    out[row, 4] = nrm * dx
                    row += 1
            return row

        def cn_evolve(Al, Ad, Au, Bl, Bd, Bu, psi, nsteps, rec,
                      dx, hbar, idx1, idx2, out):
            """Crank-Nicolson steps with a prefactorized Thomas sweep.

            The constant left-hand matrix is factored once; every rec-th
            step writes [P_below_idx1, P_below_idx2, j(idx1), j(idx2),
            norm] into the next row of out. Returns rows used.
            """
            cp, inv_den = thomas_factors(Al, Ad, Au)
            return _cn_loop(Al, cp, inv_den, Bl, Bd, Bu, psi,
                            nsteps, rec, dx, hbar, idx1, idx2, out)
    else:
        from scipy.linalg import lapack

        def cn_evolve(Al, Ad, Au, Bl, Bd, Bu, psi, nsteps, rec,
                      dx, hbar, idx1, idx2, out):
            """LAPACK-backed lane: gttrf once, gttrs per step."""
            dl, dd, du, du2, ipiv, info = lapack.zgttrf(
                Al[1:].copy(), Ad.copy(), Au[:-1].copy())
            if info != 0:
                raise np.linalg.LinAlgError("tridiagonal factorization")
            row = 0
            for s in range(nsteps):
                d = Bd * psi
                d[1:] += Bl[1:] * psi[:-1]
                d[:-1] += Bu[:-1] * psi[1:]
                psi[:], info = lapack.zgttrs(dl, dd, du, du2, ipiv, d)
                if (s + 1) % rec == 0 and row < len(out):
                    dens = psi.real ** 2 + psi.imag ** 2
                    p1 = dens[:idx1 + 1].sum() * dx
                    p2 = dens[:idx2 + 1].sum() * dx
                    nrm = dens.sum() * dx
                    j1 = hbar * (np.conj(psi[idx1]) *
                                 (psi[idx1 + 1] - psi[idx1 - 1])).imag / (
                                     2.0 * dx)
                    j2 = hbar * (np.conj(psi[idx2]) *
                                 (psi[idx2 + 1] - psi[idx2 - 1])).imag / (
                                     2.0 * dx)
                    out[row] = (p1, p2, j1, j2, nrm)
                    row += 1
            return row

    class Lane:
        pass

    lane = Lane()
    lane.name = "numba" if use_numba else "numpy"
    lane.advance_path = advance_path
    lane.cycle_sums = cycle_sums
    lane.cn_evolve = cn_evolve
    lane.pv = _pv
    return lane


kernels = _build(USE_NUMBA)


def thomas_factors(Al, Ad, Au):
    """Forward-elimination factors (cp, inv_den) of a tridiagonal matrix.

    Shared by both lanes so the constant matrix is factored exactly once.
    """
    N = len(Ad)
    cp = np.empty(N - 1, dtype=np.complex128)
    inv_den = np.empty(N, dtype=np.complex128)
    den = Ad[0]
    inv_den[0] = 1.0 / den
    for i in range(1, N):
        cp[i - 1] = Au[i - 1] * inv_den[i - 1]
        den = Ad[i] - Al[i] * cp[i - 1]
        inv_den[i] = 1.0 / den
    return cp, inv_den
