"""Pure numpy implementation of the link-geometry kernels.

Mirrors ``_ckernels.pyx`` exactly; selected when the compiled extension is
unavailable or ``SKYRELAY_PURE_PYTHON=1`` is set.

Shared conventions
------------------
``pos`` is an ``(n_nodes, 3)`` array of node coordinates (vehicles at z=0,
UAVs at their flight height); ``is_uav`` flags UAV nodes. A link is the
pair ``(tx[i], rx[i])`` of node indices. ``consts`` packs

    [coef_v, coef_u, alpha_v, alpha_u, g0_dbi, theta_3db,
     road_length, noise, si_power]

where ``coef_v = k_v * P_t`` and ``coef_u = k_u * P_u``. Longitudinal offsets
are wrapped onto the ring road of length ``road_length``.
"""

import numpy as np

NONE, NODE, FD, RI = 0, 1, 2, 3


def _wrap(dx, road_length):
    return dx - road_length * np.floor(dx / road_length + 0.5)


def _gain_lin(theta_deg, g0_dbi, theta_3db):
    att = np.minimum((theta_deg / theta_3db) ** 2, 26.0)
    return np.power(10.0, (g0_dbi - att) / 10.0)


def _pairwise(rx_nodes, peer_nodes, tx_nodes, pos, is_uav, consts):
    """Unit-fading power at rx_nodes[i] from tx_nodes[j], receiver beam on peer_nodes[i].

    Returns (power, dist) with the deviation gain applied on every entry;
    callers overwrite the desired entries with the boresight gain.
    """
    coef_v, coef_u, alpha_v, alpha_u, g0_dbi, theta_3db, road_length = consts[:7]
    prx = pos[rx_nodes]
    ppeer = pos[peer_nodes]
    ptx = pos[tx_nodes]

    bx = _wrap(ppeer[:, 0] - prx[:, 0], road_length)
    by = ppeer[:, 1] - prx[:, 1]
    wx = _wrap(ptx[None, :, 0] - prx[:, None, 0], road_length)
    wy = ptx[None, :, 1] - prx[:, None, 1]
    wz = ptx[None, :, 2] - prx[:, None, 2]

    cross = np.abs(bx[:, None] * wy - by[:, None] * wx)
    dot = bx[:, None] * wx + by[:, None] * wy
    theta = np.degrees(np.arctan2(cross, dot))
    degenerate = ((bx == 0) & (by == 0))[:, None] | ((wx == 0) & (wy == 0))
    theta = np.where(degenerate, 0.0, theta)

    dist = np.sqrt(wx * wx + wy * wy + wz * wz)
    tx_uav = is_uav[tx_nodes][None, :]
    coef = np.where(tx_uav, coef_u, coef_v)
    alpha = np.where(tx_uav, alpha_u, alpha_v)
    with np.errstate(divide="ignore"):
        power = coef * _gain_lin(theta, g0_dbi, theta_3db) * np.power(dist, -alpha)
    return power, dist


def power_matrix(tx, rx, pos, is_uav, consts):
    """P[i, j]: unit-fading power received by link i's receiver from link j's transmitter.

    The diagonal holds the desired power at full beam gain. Entries whose
    receiver is a UAV (off-diagonal) or whose interferer is the receiver
    itself (self-interference) are zero.
    """
    tx = np.asarray(tx, dtype=np.intp)
    rx = np.asarray(rx, dtype=np.intp)
    is_uav = np.asarray(is_uav, dtype=bool)
    k = tx.shape[0]
    if k == 0:
        return np.zeros((0, 0))
    coef_v, coef_u, alpha_v, alpha_u, g0_dbi = consts[:5]
    power, dist = _pairwise(rx, tx, tx, pos, is_uav, consts)
    idx = np.arange(k)
    d_des = dist[idx, idx]
    if np.any(d_des == 0):
        raise ValueError("zero-length link")
    off = ~np.eye(k, dtype=bool)
    mask = (is_uav[rx][:, None] | (tx[None, :] == rx[:, None])) & off
    if np.any(dist[off & ~mask] == 0):
        raise ValueError("interferer collocated with receiver")
    tx_uav = is_uav[tx]
    coef = np.where(tx_uav, coef_u, coef_v)
    alpha = np.where(tx_uav, alpha_u, alpha_v)
    power[idx, idx] = coef * 10.0 ** (g0_dbi / 10.0) * np.power(d_des, -alpha)
    power[mask] = 0.0
    return power


def link_sinr(tx, rx, pos, is_uav, fading, consts):
    """SINR of every link in an active set.

    ``fading`` is a ``(k, k)`` matrix of power gains (entry ``[i, j]`` applies
    to the path from transmitter ``j`` to receiver ``i``) or ``None`` for
    unit fading.
    """
    tx = np.asarray(tx, dtype=np.intp)
    rx = np.asarray(rx, dtype=np.intp)
    is_uav = np.asarray(is_uav, dtype=bool)
    k = tx.shape[0]
    if k == 0:
        return np.zeros(0)
    noise, si_power = consts[7], consts[8]
    p = power_matrix(tx, rx, pos, is_uav, consts)
    if fading is not None:
        p = p * fading
    desired = np.diag(p).copy()
    np.fill_diagonal(p, 0.0)
    interference = p.sum(axis=1)
    si = (tx[None, :] == rx[:, None]) & ~np.eye(k, dtype=bool) & ~is_uav[rx][:, None]
    return desired / (noise + interference + si_power * si.sum(axis=1))


def conflict_codes(tx_a, rx_a, tx_b, rx_b, pos, is_uav, consts, sigma):
    """Pairwise conflict code between links of set A and links of set B.

    0: none; 1: node conflict (vehicle shared in the same role, or any shared
    UAV); 2: full-duplex self-interference ratio above ``sigma``; 3: relative
    interference above ``sigma`` in either direction.
    """
    tx_a = np.asarray(tx_a, dtype=np.intp)
    rx_a = np.asarray(rx_a, dtype=np.intp)
    tx_b = np.asarray(tx_b, dtype=np.intp)
    rx_b = np.asarray(rx_b, dtype=np.intp)
    is_uav = np.asarray(is_uav, dtype=bool)
    ka, kb = tx_a.shape[0], tx_b.shape[0]
    codes = np.zeros((ka, kb), dtype=np.int8)
    if ka == 0 or kb == 0:
        return codes
    coef_v, coef_u, alpha_v, alpha_u, g0_dbi = consts[:5]
    si_power = consts[8]
    g0 = 10.0 ** (g0_dbi / 10.0)

    def desired(tx, rx):
        d = pos[tx] - pos[rx]
        d[:, 0] = _wrap(d[:, 0], consts[6])
        dist = np.sqrt((d * d).sum(axis=1))
        u = is_uav[tx]
        return np.where(u, coef_u, coef_v) * g0 * np.power(dist, -np.where(u, alpha_u, alpha_v))

    des_a = desired(tx_a, rx_a)
    des_b = desired(tx_b, rx_b)
    # interference at A's receivers from B's transmitters, and vice versa
    with np.errstate(divide="ignore", invalid="ignore"):
        p_ab, _ = _pairwise(rx_a, tx_a, tx_b, pos, is_uav, consts)
        p_ba, _ = _pairwise(rx_b, tx_b, tx_a, pos, is_uav, consts)
        ri_a = p_ab / des_a[:, None]
        ri_b = (p_ba / des_b[:, None]).T
    ri_a = np.where(is_uav[rx_a][:, None] | (tx_b[None, :] == rx_a[:, None]), 0.0, ri_a)
    ri_b = np.where(is_uav[rx_b][None, :] | (tx_a[:, None] == rx_b[None, :]), 0.0, ri_b)

    shared_role = (tx_a[:, None] == tx_b[None, :]) | (rx_a[:, None] == rx_b[None, :])
    cross_b_to_a = tx_b[None, :] == rx_a[:, None]
    cross_a_to_b = tx_a[:, None] == rx_b[None, :]
    uav_cross = (cross_b_to_a & is_uav[rx_a][:, None]) | (cross_a_to_b & is_uav[tx_a][:, None])
    node = shared_role | uav_cross

    fd = (cross_b_to_a & (si_power / des_a[:, None] > sigma)) | (
        cross_a_to_b & (si_power / des_b[None, :] > sigma)
    )
    ri = (ri_a > sigma) | (ri_b > sigma)

    codes[ri] = RI
    codes[fd] = FD
    codes[node] = NODE
    return codes
