"""Primal-dual interior-point solver for the scaled power-split program.

Mehrotra predictor-corrector on the slack form

    min  c'x   s.t.  F(x) + w = 0, w >= 0,   A x = b,

where every component of F is a convex quadratic (drive, mass, battery
epigraph rows plus box rows) and A carries the linear SOC dynamics.  The
condensed Newton system

    [ H + G' (Z/W) G   A' ] [dx]   [rhs_x]
    [ A               -e  ] [dy] = [rhs_y]

is symmetric block-tridiagonal with one 6x6 block per stage (five primal
variables plus the SOC-dynamics multiplier), because every constraint
couples at most two adjacent stages.  Factor/solve goes through the
selected kernels backend; one iterative-refinement pass against the
unregularised matrix keeps the 1e-8 tolerances honest despite the static
regularisation.

Deterministic by construction: fixed iteration order, no randomness, and a
single factorisation shared by predictor and corrector.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from .. import powertrain as pt
from .problem import (C1, C2, C3, BL, BU, EE, EL, EU, GL, GU, MM, NI, NV, PB,
                      PG, ROW_NAMES, SS, OcpProblem, OcpSolution, Tolerances,
                      STATUS_INFEASIBLE, STATUS_MAX_ITERATIONS,
                      STATUS_OPTIMAL, capacity_certificate)

EPS_PRIMAL = 1e-11
EPS_DUAL = 1e-11
STALL_LIMIT = 3


def _mfull(sd, x):
    return np.concatenate(([sd.m0s], x[:, MM]))


def _efull(sd, x):
    return np.concatenate(([sd.e0s], x[:, EE]))


def _f_eval(sd, x):
    """All inequality rows, (N, 9); feasible points give F <= 0."""
    mf = _mfull(sd, x)
    mi, mp = mf[:-1], mf[1:]
    pg, pb, s, e = x[:, PG], x[:, PB], x[:, SS], x[:, EE]
    F = np.empty((sd.N, NI))
    F[:, C1] = (sd.A2 * mi + sd.A1) * mi + sd.A0 - pg - s
    F[:, C3] = mp - mi + (sd.B2 * pg + sd.B1) * pg + sd.B0
    F[:, C2] = (sd.K2 * s + sd.K1) * s + sd.K0 + sd.Rh * pb * pb - pb
    F[:, GL] = sd.pgl - pg
    F[:, GU] = pg - sd.pgu
    F[:, BL] = sd.pbl - pb
    F[:, BU] = pb - sd.pbu
    F[:, EL] = sd.el - e
    F[:, EU] = e - sd.eu
    return F


def _grads(sd, x):
    """Nonconstant gradient entries; gm[0] multiplies fixed data, never used."""
    mi = _mfull(sd, x)[:-1]
    gm = 2.0 * sd.A2 * mi + sd.A1
    gp = 2.0 * sd.B2 * x[:, PG] + sd.B1
    gs = 2.0 * sd.K2 * x[:, SS] + sd.K1
    gb = 2.0 * sd.Rh * x[:, PB] - 1.0
    return gm, gp, gs, gb


def _g_mul(sd, g, dx):
    """G dx, (N, 9)."""
    gm, gp, gs, gb = g
    dpg, dpb, ds, dmp, de = dx[:, PG], dx[:, PB], dx[:, SS], dx[:, MM], dx[:, EE]
    dmi = np.concatenate(([0.0], dmp[:-1]))
    dei = np.concatenate(([0.0], de[:-1]))
    out = np.empty((sd.N, NI))
    out[:, C1] = gm * dmi - dpg - ds
    out[:, C3] = dmp - dmi + gp * dpg
    out[:, C2] = gs * ds + gb * dpb
    out[:, GL] = -dpg
    out[:, GU] = dpg
    out[:, BL] = -dpb
    out[:, BU] = dpb
    out[:, EL] = -de
    out[:, EU] = de
    return out


def _gt_mul(sd, g, u):
    """G' u, (N, 5)."""
    gm, gp, gs, gb = g
    out = np.zeros((sd.N, NV))
    out[:, PG] = -u[:, C1] + gp * u[:, C3] - u[:, GL] + u[:, GU]
    out[:, PB] = gb * u[:, C2] - u[:, BL] + u[:, BU]
    out[:, SS] = -u[:, C1] + gs * u[:, C2]
    out[:, MM] = u[:, C3]
    out[:-1, MM] += gm[1:] * u[1:, C1] - u[1:, C3]
    out[:, EE] = -u[:, EL] + u[:, EU]
    return out


def _a_mul(sd, dx):
    """A dx, (N,): SOC dynamics rows."""
    de = dx[:, EE]
    dei = np.concatenate(([0.0], de[:-1]))
    return de - dei + sd.Dh * dx[:, PB]


def _at_mul(sd, y):
    """A' y, (N, 5)."""
    out = np.zeros((sd.N, NV))
    out[:, PB] = sd.Dh * y
    out[:, EE] = y
    out[:-1, EE] -= y[1:]
    return out


def _r_eq(sd, x):
    ef = _efull(sd, x)
    return x[:, EE] - ef[:-1] + sd.Dh * x[:, PB]


def _quad_residual(sd, dx):
    """Second-order constraint terms 0.5 dx' Q_j dx of a candidate step.

    The inequality rows are quadratics, so the predictor's linearisation
    undershoots them by exactly this amount; feeding it to the corrector
    removes the systematic primal-residual drift.
    """
    dmi = np.concatenate(([0.0], dx[:-1, MM]))
    out = np.zeros((sd.N, NI))
    out[:, C1] = sd.A2 * dmi * dmi
    out[:, C3] = sd.B2 * dx[:, PG] ** 2
    out[:, C2] = sd.K2 * dx[:, SS] ** 2 + sd.Rh * dx[:, PB] ** 2
    return out


def _objective_grad(sd):
    c = np.zeros((sd.N, NV))
    c[-1, MM] = -1.0
    c[-1, EE] = -sd.lam_s
    return c


def _build_kkt(sd, g, z, d):
    """Diagonal and sub-diagonal 6x6 blocks of the condensed, regularised KKT."""
    gm, gp, gs, gb = g
    n = sd.N
    D = np.zeros((n, 6, 6))
    L = np.zeros((n, 6, 6))

    hm_next = 2.0 * sd.A2 * z[:, C1]        # curvature on m_i from stage i's drive row
    hpg = 2.0 * sd.B2 * z[:, C3]
    hs = 2.0 * sd.K2 * z[:, C2]
    hpb = 2.0 * sd.Rh * z[:, C2]

    D[:, PG, PG] = d[:, C1] + d[:, C3] * gp * gp + d[:, GL] + d[:, GU] + hpg + EPS_PRIMAL
    D[:, PB, PB] = d[:, C2] * gb * gb + d[:, BL] + d[:, BU] + hpb + EPS_PRIMAL
    D[:, SS, SS] = d[:, C1] + d[:, C2] * gs * gs + hs + EPS_PRIMAL
    D[:, MM, MM] = d[:, C3] + EPS_PRIMAL
    D[:-1, MM, MM] += d[1:, C1] * gm[1:] * gm[1:] + d[1:, C3] + hm_next[1:]
    D[:, EE, EE] = d[:, EL] + d[:, EU] + EPS_PRIMAL
    D[:, 5, 5] = -EPS_DUAL

    D[:, PG, SS] = d[:, C1]
    D[:, SS, PG] = d[:, C1]
    D[:, PG, MM] = d[:, C3] * gp
    D[:, MM, PG] = d[:, C3] * gp
    D[:, PB, SS] = d[:, C2] * gb * gs
    D[:, SS, PB] = d[:, C2] * gb * gs
    D[:, PB, 5] = sd.Dh
    D[:, 5, PB] = sd.Dh
    D[:, EE, 5] = 1.0
    D[:, 5, EE] = 1.0

    if n > 1:
        L[1:, PG, MM] = -d[1:, C1] * gm[1:] - d[1:, C3] * gp[1:]
        L[1:, SS, MM] = -d[1:, C1] * gm[1:]
        L[1:, MM, MM] = -d[1:, C3]
        L[1:, 5, EE] = -1.0
    return D, L


def _kkt_mul(sd, g, z, d, v):
    """Unregularised condensed KKT times v, for iterative refinement."""
    dx = v[:, :NV]
    dy = v[:, 5]
    gm, gp, gs, gb = g
    hx = np.zeros_like(dx)
    hx[:, PG] = 2.0 * sd.B2 * z[:, C3] * dx[:, PG]
    hx[:, PB] = 2.0 * sd.Rh * z[:, C2] * dx[:, PB]
    hx[:, SS] = 2.0 * sd.K2 * z[:, C2] * dx[:, SS]
    hx[:-1, MM] = 2.0 * sd.A2[1:] * z[1:, C1] * dx[:-1, MM]
    top = hx + _gt_mul(sd, g, d * _g_mul(sd, g, dx)) + _at_mul(sd, dy)
    bot = _a_mul(sd, dx)
    out = np.empty_like(v)
    out[:, :NV] = top
    out[:, 5] = bot
    return out


def _newton_solve(backend, fact, L, sd, g, z, d, rhs):
    """Backend solve plus one refinement pass against the unregularised KKT."""
    sol = backend.solve(fact, L, rhs.reshape(-1)).reshape(sd.N, 6)
    resid = rhs - _kkt_mul(sd, g, z, d, sol)
    rnorm = np.max(np.abs(resid))
    if rnorm > 1e-13 * max(1.0, np.max(np.abs(rhs))):
        sol = sol + backend.solve(fact, L, resid.reshape(-1)).reshape(sd.N, 6)
    return sol


def _step_len(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _cold_start(sd):
    n = sd.N
    x = np.empty((n, NV))
    x[:, PG] = 0.5 * (sd.pgl + sd.pgu)
    x[:, PB] = 0.5 * (sd.pbl + sd.pbu)
    x[:, SS] = _epigraph_root(sd, x[:, PB]) - 0.05
    fuel = (sd.B2 * x[:, PG] + sd.B1) * x[:, PG] + sd.B0
    x[:, MM] = sd.m0s - np.cumsum(fuel)
    span = sd.eu - sd.el
    e = sd.e0s - np.cumsum(sd.Dh * x[:, PB])
    x[:, EE] = np.clip(e, sd.el + 0.02 * span, sd.eu - 0.02 * span)
    return x


def _epigraph_root(sd, pb):
    """Largest s with the battery epigraph row active, i.e. scaled g^-1(pb)."""
    rhs = pb - sd.Rh * pb * pb - sd.K0
    out = np.empty_like(pb)
    quad = sd.K2 > pt.KAPPA2_ZERO_TOL * sd.P_s
    k2, k1 = sd.K2[quad], sd.K1[quad]
    rad = np.maximum(rhs[quad] / k2 + (k1 / (2.0 * k2)) ** 2, 0.0)
    out[quad] = -k1 / (2.0 * k2) + np.sqrt(rad)
    out[~quad] = rhs[~quad] / sd.K1[~quad]
    return out


def _warm_start(sd, warm):
    """Scale and interior-clip a shifted previous solution."""
    n = sd.N
    x = np.empty((n, NV))

    def fit(arr, fill):
        a = np.asarray(arr, dtype=float)
        if a.size >= n:
            return a[:n].copy()
        out = np.full(n, fill if a.size == 0 else a[-1], dtype=float)
        out[:a.size] = a
        return out

    mgl = 1e-6 * max(1.0, sd.pgu - sd.pgl)
    x[:, PG] = np.clip(fit(warm["p_gt_W"], 0.0) / sd.P_s, sd.pgl + mgl, sd.pgu - mgl)
    span_b = np.maximum(sd.pbu - sd.pbl, 1e-9)
    pb = np.clip(fit(warm["p_b_W"], 0.0) / sd.P_s,
                 sd.pbl + 1e-6 * span_b, sd.pbu - 1e-6 * span_b)
    x[:, PB] = pb
    x[:, SS] = np.minimum(fit(warm["s_W"], 0.0) / sd.P_s,
                          _epigraph_root(sd, pb) - 1e-6)
    m = np.asarray(warm["m_kg"], dtype=float) / sd.M_s
    x[:, MM] = fit(m, sd.m0s)
    span_e = sd.eu - sd.el
    e = np.asarray(warm["E_J"], dtype=float) / sd.E_s
    x[:, EE] = np.clip(fit(e, sd.e0s), sd.el + 1e-6 * span_e, sd.eu - 1e-6 * span_e)
    return x


def _worst_violation(p: OcpProblem, sd, x):
    F = _f_eval(sd, x)
    req = np.abs(_r_eq(sd, x))
    i, j = np.unravel_index(int(np.argmax(F)), F.shape)
    parts = [f"worst inequality: stage {i} {ROW_NAMES[j]} violated by {max(F[i, j], 0.0):.3e} (scaled)"]
    k = int(np.argmax(req))
    parts.append(f"worst SOC-dynamics residual: stage {k}, {req[k]:.3e} (scaled)")
    return "; ".join(parts)


def solve(p: OcpProblem, tol: Tolerances = Tolerances(), max_iter: int = 100,
          warm: dict | None = None, backend: str | None = None) -> OcpSolution:
    """Solve the assembled problem to the requested tolerances.

    `warm` is the warm_data payload of a previous OcpSolution (physical
    units); only the primal point is reused.  Warm and cold starts land on
    the same optimum to solver tolerance, warm typically in fewer
    iterations.
    """
    sd = p.sd
    be = kernels.get_backend(backend)
    n = sd.N

    cert = capacity_certificate(p)
    if cert is not None:
        x = _cold_start(sd)
        return _package(p, x, STATUS_INFEASIBLE, 0,
                        {"primal": np.inf, "dual": np.inf, "gap": np.inf},
                        f"infeasible by static capacity check: {cert}")

    x = _warm_start(sd, warm) if warm is not None else _cold_start(sd)
    F = _f_eval(sd, x)
    w = np.maximum(-F, 0.1 if warm is None else 1e-3)
    z = np.full((n, NI), 0.1)
    y = np.zeros(n)
    c = _objective_grad(sd)
    mI = n * NI

    # residual normalisations: data is pre-scaled, so O(1) references
    pnorm = 1.0 + max(abs(sd.m0s), abs(sd.e0s), float(np.max(np.abs(sd.pbu))))
    dnorm = 1.0 + float(np.max(np.abs(c)))

    status = STATUS_MAX_ITERATIONS
    message = ""
    it = 0
    stall = 0
    res = {"primal": np.inf, "dual": np.inf, "gap": np.inf}

    for it in range(1, max_iter + 1):
        F = _f_eval(sd, x)
        g = _grads(sd, x)
        r_d = c + _gt_mul(sd, g, z) + _at_mul(sd, y)
        r_g = F + w
        r_e = _r_eq(sd, x)
        mu = float(np.sum(w * z)) / mI

        obj = -x[-1, MM] - sd.lam_s * x[-1, EE]
        res = {
            "primal": max(float(np.max(np.abs(r_g))), float(np.max(np.abs(r_e)))) / pnorm,
            "dual": float(np.max(np.abs(r_d))) / (dnorm + float(np.max(z))),
            "gap": mu / (1.0 + abs(obj)),
        }
        if res["primal"] <= tol.feas and res["dual"] <= tol.feas and res["gap"] <= tol.opt:
            status = STATUS_OPTIMAL
            break

        d = z / w
        D, L = _build_kkt(sd, g, z, d)
        fact = be.factor(D, L)

        # predictor
        rc = w * z
        rhs = np.empty((n, 6))
        rhs[:, :NV] = -r_d - _gt_mul(sd, g, (z * r_g - rc) / w)
        rhs[:, 5] = -r_e
        sol = _newton_solve(be, fact, L, sd, g, z, d, rhs)
        dx_a, dy_a = sol[:, :NV], sol[:, 5]
        dw_a = -r_g - _g_mul(sd, g, dx_a)
        dz_a = (-rc - z * dw_a) / w

        ap = min(1.0, _step_len(w.ravel(), dw_a.ravel()))
        ad = min(1.0, _step_len(z.ravel(), dz_a.ravel()))
        mu_aff = float(np.sum((w + ap * dw_a) * (z + ad * dz_a))) / mI
        sigma = min(max((max(mu_aff, 0.0) / mu) ** 3, 1e-8), 1.0 - 1e-8)
        # keep the barrier alive while feasibility lags complementarity far behind
        feas = max(res["primal"], res["dual"])
        if feas > 1e3 * res["gap"]:
            sigma = max(sigma, 0.3)

        # corrector reuses the factorisation; r_g is augmented with the
        # constraint curvature of the affine step
        r_g2 = r_g + _quad_residual(sd, dx_a)
        rc = w * z + dw_a * dz_a - sigma * mu
        rhs[:, :NV] = -r_d - _gt_mul(sd, g, (z * r_g2 - rc) / w)
        rhs[:, 5] = -r_e
        sol = _newton_solve(be, fact, L, sd, g, z, d, rhs)
        dx, dy = sol[:, :NV], sol[:, 5]
        dw = -r_g2 - _g_mul(sd, g, dx)
        dz = (-rc - z * dw) / w

        if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dz))):
            message = "non-finite step; aborting"
            break

        tau = 0.9995 if mu < 1e-4 else 0.995
        a_p = min(1.0, tau * _step_len(w.ravel(), dw.ravel()))
        a_d = min(1.0, tau * _step_len(z.ravel(), dz.ravel()))
        if a_p < 1e-10 and a_d < 1e-10:
            stall += 1
            if stall >= STALL_LIMIT:
                message = "step length collapsed"
                break
        else:
            stall = 0

        x = x + a_p * dx
        w = w + a_p * dw
        y = y + a_d * dy
        z = z + a_d * dz

    if status != STATUS_OPTIMAL:
        # classify: stuck with large primal residual means no feasible point found
        if res["primal"] > 1e3 * tol.feas:
            status = STATUS_INFEASIBLE
            message = (message + "; " if message else "") + _worst_violation(p, sd, x)
        else:
            status = STATUS_MAX_ITERATIONS
            message = (message + "; " if message else "") + (
                f"not converged to tolerance in {it} iterations")

    return _package(p, x, status, it, res, message)


def _package(p: OcpProblem, x, status, iterations, res, message) -> OcpSolution:
    sd = p.sd
    p_gt = x[:, PG] * sd.P_s
    p_b = x[:, PB] * sd.P_s
    s_w = x[:, SS] * sd.P_s
    m = np.concatenate(([p.m0], x[:, MM] * sd.M_s))
    # SOC dynamics are equalities: report the exactly integrated trajectory
    # so the terminal term is consistent with the battery powers (the mass
    # rows are relaxed inequalities and stay exactly as solved)
    e = np.concatenate(([p.E0], p.E0 - p.delta * np.cumsum(p_b)))
    p_em = np.empty(p.N)
    # non-optimal iterates may sit outside the battery box; clip for recovery
    pb_safe = np.clip(p_b, p.stages.p_b_min, p.stages.p_b_max)
    for i in range(p.N):
        p_em[i] = pt.battery_inverse(float(pb_safe[i]), p.stages.loss_coeffs(i),
                                     p.battery)
    objective = p.terminal_objective(float(m[-1]), float(e[-1]))
    warm_data = {
        "p_gt_W": p_gt.copy(), "p_b_W": p_b.copy(), "s_W": s_w,
        "m_kg": m[1:].copy(), "E_J": e[1:].copy(),
    }
    return OcpSolution(p_gt_W=p_gt, p_b_W=p_b, p_em_W=p_em, m_kg=m, E_J=e,
                       objective_kg=float(objective), status=status,
                       iterations=iterations,
                       kkt_residuals={k: float(v) for k, v in res.items()},
                       message=message, warm_data=warm_data)
