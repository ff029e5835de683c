"""Pure-Python annealing kernels.

Reference implementation of the compiled kernels in ``_anneal.pyx``.  Both
must perform the same floating-point operations in the same order so a
given random stream yields bit-identical final states.
"""

from math import exp, floor


def _penalty(mode, v, scale, rng):
    if mode == 0:
        return v * v
    t = floor(-v * scale + 0.5)
    if t < 0.0:
        t = 0.0
    elif t > rng:
        t = rng
    v = v + t / scale
    return v * v


def anneal_collapsed(
    x, betas, uniforms,
    obj_lin, obj_ptr, obj_nbr, obj_val,
    var_ptr, var_con, var_coef,
    activity, con_mode, con_weight, con_scale, con_range,
):
    """Metropolis sweeps over the original variables with slack minimised out.

    ``x`` and ``activity`` are updated in place.  ``con_mode`` is 0 for an
    equality (penalty ``v**2``), 1 for an inequality with optimal slack,
    2 for a constraint that carries no penalty.
    """
    n = len(x)
    xs = [int(b) for b in x]
    act = [float(a) for a in activity]
    lin = obj_lin.tolist()
    optr = obj_ptr.tolist()
    onbr = obj_nbr.tolist()
    oval = obj_val.tolist()
    vptr = var_ptr.tolist()
    vcon = var_con.tolist()
    vcoef = var_coef.tolist()
    mode = con_mode.tolist()
    weight = con_weight.tolist()
    scale = con_scale.tolist()
    rng = con_range.tolist()

    for sweep in range(len(betas)):
        beta = float(betas[sweep])
        row = uniforms[sweep].tolist()
        for i in range(n):
            s = 1.0 - 2.0 * xs[i]
            field = lin[i]
            for k in range(optr[i], optr[i + 1]):
                if xs[onbr[k]]:
                    field += oval[k]
            d = s * field
            for k in range(vptr[i], vptr[i + 1]):
                c = vcon[k]
                m = mode[c]
                if m == 2:
                    continue
                v = act[c]
                d += weight[c] * (
                    _penalty(m, v + s * vcoef[k], scale[c], rng[c])
                    - _penalty(m, v, scale[c], rng[c])
                )
            if d <= 0.0 or row[i] < exp(-beta * d):
                xs[i] = 1 - xs[i]
                for k in range(vptr[i], vptr[i + 1]):
                    act[vcon[k]] += s * vcoef[k]

    x[:] = xs
    activity[:] = act


def anneal_flip(x, betas, uniforms, lin, ptr, nbr, val):
    """Plain single-flip Metropolis sweeps over every QUBO variable."""
    n = len(x)
    xs = [int(b) for b in x]
    h = lin.tolist()
    p = ptr.tolist()
    nb = nbr.tolist()
    vv = val.tolist()
    for sweep in range(len(betas)):
        beta = float(betas[sweep])
        row = uniforms[sweep].tolist()
        for i in range(n):
            field = h[i]
            for k in range(p[i], p[i + 1]):
                if xs[nb[k]]:
                    field += vv[k]
            d = (1.0 - 2.0 * xs[i]) * field
            if d <= 0.0 or row[i] < exp(-beta * d):
                xs[i] = 1 - xs[i]
    x[:] = xs
