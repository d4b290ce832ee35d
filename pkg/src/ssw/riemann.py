"""Path-conservative HLL-type Riemann solvers with the linear path.

Every solver takes left/right conserved states of shape ``(6, ...)`` and
returns the split fluctuations ``D-`` and ``D+`` at the face.  The states of
the approximate wave fan are built so that each wave satisfies the jump
condition

    F_R - F_L + B((m_L + m_R)/2) (h_R - h_L) = S (U_R - U_L)

where, at intermediate states, F is the flux written with the wave-model
quantities (for instance R11* from the momentum jump), not the flux of the
intermediate conserved vector.  Those fluxes are returned in the fan so the
jump conditions can be checked wave by wave.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    E11,
    E12,
    E22,
    H,
    M1,
    M2,
    cons_to_prim,
    noncons_vector,
    physical_flux,
    rotate_state,
)

EPS_SHEAR = 1e-12
EPS_CONTACT = 1e-14

SOLVERS = ("hll", "hllc3", "hllc5")


class DegenerateFaceError(ArithmeticError):
    """The HLL wave fan has zero width."""


@dataclass
class FluctuationPair:
    d_minus: np.ndarray
    d_plus: np.ndarray

    def __iter__(self):
        yield self.d_minus
        yield self.d_plus


@dataclass
class WaveFan:
    """Speeds, states and wave-model fluxes of an approximate Riemann fan.

    ``states[0]`` and ``states[-1]`` are the left and right input states and
    ``speeds[k]`` separates ``states[k]`` from ``states[k + 1]``.  For the
    five-wave solver the speeds are ``(S_L, S_*L, u_*, S_*R, S_R)``.
    ``fallback`` is 0 where the solver ran as named, 1 where it fell back one
    level (HLLC5 to HLLC3, HLLC3 to HLL) and 2 where HLLC5 fell back to HLL.
    """

    speeds: list
    states: list
    fluxes: list
    fallback: np.ndarray = field(default=None)

    @property
    def nwaves(self):
        return len(self.speeds)


def wave_speed_estimates(uL, uR, g, qL=None, qR=None):
    """Slowest and fastest signal speeds, compared against the averaged state."""
    if qL is None:
        qL = cons_to_prim(uL, check=False)
    if qR is None:
        qR = cons_to_prim(uR, check=False)
    qa = cons_to_prim(0.5 * (np.asarray(uL) + np.asarray(uR)), check=False)

    def c(q):
        return np.sqrt(g * q[0] + 3.0 * q[3] / q[0])

    s_l = np.minimum(qL[1] - c(qL), qa[1] - c(qa))
    s_r = np.maximum(qR[1] + c(qR), qa[1] + c(qa))
    return s_l, s_r


def jump_residual(uL, uR, speed, g, fL=None, fR=None):
    """Residual of the linear-path jump condition across a wave of speed ``speed``.

    ``fL``/``fR`` default to the physical fluxes of the two states; pass the
    wave-model fluxes when checking intermediate states of a solver fan.
    """
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    if fL is None:
        fL = physical_flux(uL, g)
    if fR is None:
        fR = physical_flux(uR, g)
    bm = noncons_vector(0.5 * (uL[M1] + uR[M1]), 0.5 * (uL[M2] + uR[M2]), g)
    return fR - fL + bm * (uR[H] - uL[H]) - speed * (uR - uL)


def _split(speeds, states):
    d_minus = np.zeros_like(states[0])
    d_plus = np.zeros_like(states[0])
    for s, ua, ub in zip(speeds, states[:-1], states[1:]):
        du = ub - ua
        d_minus += np.minimum(s, 0.0) * du
        d_plus += np.maximum(s, 0.0) * du
    return d_minus, d_plus


def _table_state(h, u, v, e11, e12, e22):
    return np.stack([h, h * u, h * v, e11, e12, e22])


def _table_flux(h, u, v, r11, r12, e11, e12, e22, g):
    return np.stack(
        [
            h * u,
            r11 + h * u * u + 0.5 * g * h * h,
            r12 + h * u * v,
            (e11 + r11) * u,
            e12 * u + 0.5 * (r11 * v + r12 * u),
            e22 * u + r12 * v,
        ]
    )


def _zero_equal(uL, uR, d_minus, d_plus):
    same = np.all(uL == uR, axis=0)
    if np.any(same):
        d_minus[:, same] = 0.0
        d_plus[:, same] = 0.0
    return d_minus, d_plus


def _prepare(uL, uR, g):
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    qL = cons_to_prim(uL, check=False)
    qR = cons_to_prim(uR, check=False)
    s_l, s_r = wave_speed_estimates(uL, uR, g, qL, qR)
    return uL, uR, qL, qR, s_l, s_r


def _hll_core(uL, uR, qL, qR, s_l, s_r, g, fan):
    width = s_r - s_l
    if np.any(~(width > 0)):
        raise DegenerateFaceError("HLL wave fan has zero width (S_L >= S_R)")
    fL = physical_flux(uL, g, q=qL)
    fR = physical_flux(uR, g, q=qR)
    du = uR - uL
    df = fR - fL
    ustar = np.empty_like(uL)
    ustar[:3] = uL[:3] + (s_r * du[:3] - df[:3]) / width
    hs = ustar[H]
    b_left = noncons_vector(0.5 * (uL[M1] + ustar[M1]), 0.5 * (uL[M2] + ustar[M2]), g)
    b_right = noncons_vector(0.5 * (ustar[M1] + uR[M1]), 0.5 * (ustar[M2] + uR[M2]), g)
    bterm = b_left * (hs - uL[H]) + b_right * (uR[H] - hs)
    ustar[3:] = uL[3:] + (s_r * du[3:] - df[3:] - bterm[3:]) / width
    speeds = [s_l, s_r]
    states = [uL, ustar, uR]
    d_minus, d_plus = _split(speeds, states)
    if not fan:
        return d_minus, d_plus, None
    fstar = fL + s_l * (ustar - uL) - b_left * (hs - uL[H])
    return d_minus, d_plus, WaveFan(speeds, states, [fL, fstar, fR])


def _hllc3_core(uL, uR, qL, qR, s_l, s_r, g, fan):
    """Returns (d_minus, d_plus, fan_or_None, bad_mask)."""
    hL, uL_, vL, r11L, r12L = qL[0], qL[1], qL[2], qL[3], qL[4]
    hR, uR_, vR, r11R, r12R = qR[0], qR[1], qR[2], qR[3], qR[4]
    aL = hL * (s_l - uL_)
    aR = hR * (s_r - uR_)
    den = aR - aL
    scale = np.maximum(np.abs(aR), np.abs(aL))
    with np.errstate(divide="ignore", invalid="ignore"):
        us = uL_ + (aR * (uR_ - uL_) - (r11R - r11L) - 0.5 * g * (hR * hR - hL * hL)) / den
        vs = vL + (aR * (vR - vL) - (r12R - r12L)) / den
        bad = ~(np.abs(den) > EPS_CONTACT * scale) | ~((s_l < us) & (us < s_r))
        r12s = 0.5 * ((r12L + aL * (vs - vL)) + (r12R + aR * (vs - vR)))

        def star(side_u, q, a, s):
            h, u, v, r11, r12 = q[0], q[1], q[2], q[3], q[4]
            wrel = s - us
            hs = a / wrel
            r11s = r11 + a * (us - u) + 0.5 * g * (h * h - hs * hs)
            e11s = side_u[E11] + (
                (us - u) * side_u[E11] + r11s * us - r11 * u
                + 0.5 * g * (h * u + hs * us) * (hs - h)
            ) / wrel
            e12s = side_u[E12] + (
                (us - u) * side_u[E12]
                + 0.5 * (r11s * vs + r12s * us)
                - 0.5 * (r11 * v + r12 * u)
                + 0.25 * g * (h * v + hs * vs) * (hs - h)
            ) / wrel
            e22s = side_u[E22] + ((us - u) * side_u[E22] + r12s * vs - r12 * v) / wrel
            ustate = _table_state(hs, us, vs, e11s, e12s, e22s)
            return hs, r11s, e11s, e12s, e22s, ustate

        hsL, r11sL, e11sL, e12sL, e22sL, usL = star(uL, qL, aL, s_l)
        hsR, r11sR, e11sR, e12sR, e22sR, usR = star(uR, qR, aR, s_r)

    speeds = [s_l, us, s_r]
    states = [uL, usL, usR, uR]
    d_minus, d_plus = _split(speeds, states)
    if not fan:
        return d_minus, d_plus, None, bad
    fluxes = [
        physical_flux(uL, g, q=qL),
        _table_flux(hsL, us, vs, r11sL, r12s, e11sL, e12sL, e22sL, g),
        _table_flux(hsR, us, vs, r11sR, r12s, e11sR, e12sR, e22sR, g),
        physical_flux(uR, g, q=qR),
    ]
    return d_minus, d_plus, WaveFan(speeds, states, fluxes), bad


def _hllc5_core(uL, uR, qL, qR, s_l, s_r, g, fan):
    """Returns (d_minus, d_plus, fan_or_None, contact_bad, shear_bad)."""
    hL, uL_, r11L = qL[0], qL[1], qL[3]
    hR, uR_, r11R = qR[0], qR[1], qR[3]
    aL = hL * (s_l - uL_)
    aR = hR * (s_r - uR_)
    den = aR - aL
    scale = np.maximum(np.abs(aR), np.abs(aL))
    pL = r11L + 0.5 * g * hL * hL
    pR = r11R + 0.5 * g * hR * hR
    with np.errstate(divide="ignore", invalid="ignore"):
        us = uL_ + (aR * (uR_ - uL_) - (pR - pL)) / den
        contact_bad = ~(np.abs(den) > EPS_CONTACT * scale) | ~((s_l < us) & (us < s_r))
        pstar = (aR * pL - aL * pR + aL * aR * (uR_ - uL_)) / den

        def star(side_u, q, a, s):
            h, u, v, r11, r12 = q[0], q[1], q[2], q[3], q[4]
            wrel = s - us
            hs = a / wrel
            m = -a
            p12 = r12 / h
            denom = m * m - hs * pstar + 0.5 * g * h * hs * hs
            vs = v + (m * (h - hs) - h * hs * (u - us)) / denom * p12
            p12s = (m * m - h * pstar + 0.5 * g * h * h * hs + m * h * (u - us)) / denom * p12
            r12s = hs * p12s
            r11s = r11 + a * (us - u) + 0.5 * g * (h * h - hs * hs)
            e11s = side_u[E11] + (
                (us - u) * side_u[E11] + r11s * us - r11 * u
                + 0.5 * g * (h * u + hs * us) * (hs - h)
            ) / wrel
            e12s = 0.5 * r12s + 0.5 * hs * us * vs
            e22s = side_u[E22] + ((us - u) * side_u[E22] + r12s * vs - r12 * v) / wrel
            return hs, vs, r11s, r12s, e11s, e12s, e22s, denom

        hsL, vsL, r11sL, r12sL, e11sL, e12sL, e22sL, dnL = star(uL, qL, aL, s_l)
        hsR, vsR, r11sR, r12sR, e11sR, e12sR, e22sR, dnR = star(uR, qR, aR, s_r)
        p11sL = r11sL / hsL
        p11sR = r11sR / hsR
        shear_bad = (
            ~(np.minimum(p11sL, p11sR) >= EPS_SHEAR)
            | ~(np.abs(dnL) > 0)
            | ~(np.abs(dnR) > 0)
        ) & ~contact_bad
        cL = np.sqrt(np.where(p11sL > 0, p11sL, 1.0))
        cR = np.sqrt(np.where(p11sR > 0, p11sR, 1.0))
        wL = hsL * cL
        wR = hsR * cR
        vss = vsL + (wR * (vsR - vsL) - (r12sR - r12sL)) / (wL + wR)
        r12ss = 0.5 * ((r12sL - wL * (vss - vsL)) + (r12sR + wR * (vss - vsR)))
        e22ssL = e22sL - (r12ss * vss - r12sL * vsL) / cL
        e22ssR = e22sR + (r12ss * vss - r12sR * vsR) / cR
        e12ssL = 0.5 * r12ss + 0.5 * hsL * us * vss
        e12ssR = 0.5 * r12ss + 0.5 * hsR * us * vss

    usL = _table_state(hsL, us, vsL, e11sL, e12sL, e22sL)
    ussL = _table_state(hsL, us, vss, e11sL, e12ssL, e22ssL)
    ussR = _table_state(hsR, us, vss, e11sR, e12ssR, e22ssR)
    usR = _table_state(hsR, us, vsR, e11sR, e12sR, e22sR)
    speeds = [s_l, us - cL, us, us + cR, s_r]
    states = [uL, usL, ussL, ussR, usR, uR]
    d_minus, d_plus = _split(speeds, states)
    if not fan:
        return d_minus, d_plus, None, contact_bad, shear_bad
    fluxes = [
        physical_flux(uL, g, q=qL),
        _table_flux(hsL, us, vsL, r11sL, r12sL, e11sL, e12sL, e22sL, g),
        _table_flux(hsL, us, vss, r11sL, r12ss, e11sL, e12ssL, e22ssL, g),
        _table_flux(hsR, us, vss, r11sR, r12ss, e11sR, e12ssR, e22ssR, g),
        _table_flux(hsR, us, vsR, r11sR, r12sR, e11sR, e12sR, e22sR, g),
        physical_flux(uR, g, q=qR),
    ]
    return d_minus, d_plus, WaveFan(speeds, states, fluxes), contact_bad, shear_bad


def _widen(fan, nwaves):
    """Embed a fan with fewer waves into ``nwaves`` by inserting null waves."""
    if fan.nwaves == nwaves:
        return fan
    speeds, states, fluxes = list(fan.speeds), list(fan.states), list(fan.fluxes)
    if fan.nwaves == 2:
        # HLL -> three waves: a null middle wave at the centre of the fan
        speeds = [speeds[0], 0.5 * (speeds[0] + speeds[1]), speeds[1]]
        states = [states[0], states[1], states[1], states[2]]
        fluxes = [fluxes[0], fluxes[1], fluxes[1], fluxes[2]]
    if nwaves == 5:
        s_l, s_m, s_r = speeds
        speeds = [s_l, s_m, s_m, s_m, s_r]
        states = [states[0], states[1], states[1], states[2], states[2], states[3]]
        fluxes = [fluxes[0], fluxes[1], fluxes[1], fluxes[2], fluxes[2], fluxes[3]]
    return WaveFan(speeds, states, fluxes)


def _patch_fan(fan, sub, mask):
    for k in range(fan.nwaves):
        arr = np.array(fan.speeds[k], dtype=float, copy=True)
        arr[mask] = sub.speeds[k]
        fan.speeds[k] = arr
    for dst, src in ((fan.states, sub.states), (fan.fluxes, sub.fluxes)):
        for k in range(len(dst)):
            arr = np.array(dst[k], dtype=float, copy=True)
            arr[:, mask] = src[k]
            dst[k] = arr


def hll(uL, uR, g, fan=False):
    """Two-wave HLL splitting; intermediate state solved block-wise."""
    uL, uR, qL, qR, s_l, s_r = _prepare(uL, uR, g)
    d_minus, d_plus, wf = _hll_core(uL, uR, qL, qR, s_l, s_r, g, fan)
    d_minus, d_plus = _zero_equal(uL, uR, d_minus, d_plus)
    pair = FluctuationPair(d_minus, d_plus)
    if fan:
        wf.fallback = np.zeros(np.shape(s_l), dtype=int)
        return pair, wf
    return pair


def _select(u, mask):
    return u[:, mask]


def hllc3(uL, uR, g, fan=False):
    """Three-wave solver resolving the contact; falls back to HLL on degenerate faces."""
    uL, uR, qL, qR, s_l, s_r = _prepare(uL, uR, g)
    d_minus, d_plus, wf, bad = _hllc3_core(uL, uR, qL, qR, s_l, s_r, g, fan)
    fallback = np.zeros(np.shape(s_l), dtype=int)
    if np.any(bad):
        scalar = np.ndim(bad) == 0
        if scalar:
            return _scalar_fallback(hll, uL, uR, g, fan, 3, 1)
        sub = _hll_core(
            _select(uL, bad), _select(uR, bad), _select(qL, bad), _select(qR, bad),
            s_l[bad], s_r[bad], g, fan,
        )
        d_minus[:, bad] = sub[0]
        d_plus[:, bad] = sub[1]
        fallback[bad] = 1
        if fan:
            _patch_fan(wf, _widen(sub[2], 3), bad)
    d_minus, d_plus = _zero_equal(uL, uR, d_minus, d_plus)
    pair = FluctuationPair(d_minus, d_plus)
    if fan:
        wf.fallback = fallback
        return pair, wf
    return pair


def _scalar_fallback(solver, uL, uR, g, fan, nwaves, level):
    res = solver(uL, uR, g, fan=fan)
    if not fan:
        return res
    pair, wf = res
    wf = _widen(wf, nwaves)
    wf.fallback = np.asarray(level + int(np.asarray(getattr(res[1], "fallback", 0))))
    return pair, wf


def hllc5(uL, uR, g, fan=False):
    """Five-wave solver including both shear waves.

    Falls back to HLLC3 where the shear and contact waves merge (P11* below
    ``EPS_SHEAR``) and to HLL where the contact speed is degenerate.
    """
    uL, uR, qL, qR, s_l, s_r = _prepare(uL, uR, g)
    d_minus, d_plus, wf, cbad, sbad = _hllc5_core(uL, uR, qL, qR, s_l, s_r, g, fan)
    fallback = np.zeros(np.shape(s_l), dtype=int)
    if np.ndim(s_l) == 0:
        if cbad:
            return _scalar_fallback(hll, uL, uR, g, fan, 5, 2)
        if sbad:
            return _scalar_fallback(hllc3, uL, uR, g, fan, 5, 1)
    else:
        if np.any(sbad):
            sub = _hllc3_core(
                _select(uL, sbad), _select(uR, sbad), _select(qL, sbad), _select(qR, sbad),
                s_l[sbad], s_r[sbad], g, fan,
            )
            d_minus[:, sbad] = sub[0]
            d_plus[:, sbad] = sub[1]
            fallback[sbad] = 1
            if fan:
                _patch_fan(wf, _widen(sub[2], 5), sbad)
        if np.any(cbad):
            sub = _hll_core(
                _select(uL, cbad), _select(uR, cbad), _select(qL, cbad), _select(qR, cbad),
                s_l[cbad], s_r[cbad], g, fan,
            )
            d_minus[:, cbad] = sub[0]
            d_plus[:, cbad] = sub[1]
            fallback[cbad] = 2
            if fan:
                _patch_fan(wf, _widen(sub[2], 5), cbad)
    d_minus, d_plus = _zero_equal(uL, uR, d_minus, d_plus)
    pair = FluctuationPair(d_minus, d_plus)
    if fan:
        wf.fallback = fallback
        return pair, wf
    return pair


_REGISTRY = {"hll": hll, "hllc3": hllc3, "hllc5": hllc5}


def get_solver(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown Riemann solver {name!r}; choose from {SOLVERS}") from None


def fluctuations(name, uL, uR, g, axis=0):
    """Split fluctuations for faces normal to ``axis`` (0: x, 1: y)."""
    solver = get_solver(name)
    if axis == 0:
        return solver(uL, uR, g)
    d_minus, d_plus = solver(rotate_state(uL), rotate_state(uR), g)
    return FluctuationPair(rotate_state(d_minus), rotate_state(d_plus))
