"""Hot numeric kernels, written once and JIT-compiled when numba is enabled.

Everything here is pure array-in/array-out code restricted to the NumPy
subset numba supports, so the same source runs under ``@njit`` and as plain
NumPy (see :mod:`wranksim.backend`). Argument validation and error
reporting live in the public wrappers, not here.

Conventions:
  - all floating point data is float64, C-contiguous;
  - weight matrices are (out, in), activations are (batch, width);
  - tie policies and activations are passed as integer codes.
"""

import numpy as np

from .backend import KernelList, njit

# tie policy codes
COMPETITION = 0
PERMUTATION = 1

# activation codes
RELU = 0
TANH = 1


@njit
def rank_kernel(a, policy):
    """Descending ranks of ``a`` (largest value gets rank 1).

    COMPETITION: rank_i = 1 + #{j : a_j > a_i}, ties share a rank.
    PERMUTATION: ties broken by ascending original index (stable).
    """
    n = a.shape[0]
    ranks = np.empty(n, dtype=np.int64)
    if policy == COMPETITION:
        for i in range(n):
            greater = 0
            for j in range(n):
                if a[j] > a[i]:
                    greater += 1
            ranks[i] = 1 + greater
    else:
        order = np.argsort(-a, kind="mergesort")
        for k in range(n):
            ranks[order[k]] = k + 1
    return ranks


@njit
def blackbox_rank_grad_kernel(a, upstream, lam, policy):
    """Perturbation-based surrogate gradient through the rank function.

    Returns -(rank(a) - rank(a + lam * upstream)) / lam.
    """
    base = rank_kernel(a, policy)
    perturbed = rank_kernel(a + lam * upstream, policy)
    n = a.shape[0]
    grad = np.empty(n, dtype=np.float64)
    for i in range(n):
        grad[i] = (perturbed[i] - base[i]) / lam
    return grad


@njit
def cosine_matrix_kernel(V):
    """Pairwise cosine similarities of the rows of ``V``.

    Rows must be nonzero (checked by callers). Off-diagonal entries are
    clamped into [-1, 1]; the diagonal is exactly 1. Also returns the row
    norms, which the gradient chain reuses.
    """
    n = V.shape[0]
    norms = np.empty(n, dtype=np.float64)
    for i in range(n):
        norms[i] = np.sqrt(np.dot(V[i], V[i]))
    S = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        S[i, i] = 1.0
        for j in range(i + 1, n):
            c = np.dot(V[i], V[j]) / (norms[i] * norms[j])
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            S[i, j] = c
            S[j, i] = c
    return S, norms


@njit
def rank_mse_grad_kernel(S, target_ranks, lam, policy):
    """Sum over rows of mean-squared rank disagreement, with the surrogate
    gradient on the similarity matrix.

    For each row i: rank the row, take the MSE against ``target_ranks[i]``
    (averaged over the row's entries), and push the MSE upstream through
    the perturbation-based rank gradient. Rows are independent loss terms;
    ``grad_S[i, j]`` is row i's gradient on entry (i, j) only.
    """
    n = S.shape[0]
    loss = 0.0
    grad_S = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        row = S[i]
        r = rank_kernel(row, policy)
        d = np.empty(n, dtype=np.float64)
        for j in range(n):
            d[j] = r[j] - target_ranks[i, j]
        loss += np.dot(d, d) / n
        upstream = (2.0 / n) * d
        r2 = rank_kernel(row + lam * upstream, policy)
        for j in range(n):
            grad_S[i, j] = (r2[j] - r[j]) / lam
    return loss, grad_S


@njit
def cosine_chain_grad_kernel(V, S, norms, grad_S):
    """Backpropagate a gradient on the pairwise cosine matrix into the rows
    of ``V``.

    ``grad_S[i, j]`` is treated as the gradient on cos(V[i], V[j]) coming
    from row i's loss term, so the symmetric entry (j, i) contributes
    separately. Diagonal entries are constant (cos = 1) and contribute
    nothing.
    """
    n = V.shape[0]
    h = V.shape[1]
    grad_V = np.zeros((n, h), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            g = grad_S[i, j]
            if g == 0.0:
                continue
            inv = 1.0 / (norms[i] * norms[j])
            cij = S[i, j]
            inv_i2 = 1.0 / (norms[i] * norms[i])
            inv_j2 = 1.0 / (norms[j] * norms[j])
            for k in range(h):
                grad_V[i, k] += g * (V[j, k] * inv - cij * V[i, k] * inv_i2)
                grad_V[j, k] += g * (V[i, k] * inv - cij * V[j, k] * inv_j2)
    return grad_V


@njit
def mlp_forward_kernel(weights, biases, head, X, act_code):
    """Forward pass for a batch: returns all layer activations (input
    first, last hidden layer last) and the head logits.

    ``weights``/``biases`` hold at least one hidden layer; the zero-depth
    case is handled by the caller.
    """
    acts = KernelList()
    a = X
    acts.append(a)
    for l in range(len(weights)):
        pre = np.dot(a, weights[l].T) + biases[l]
        if act_code == RELU:
            a = np.maximum(pre, 0.0)
        else:
            a = np.tanh(pre)
        acts.append(a)
    logits = np.dot(a, head.T)
    return acts, logits


@njit
def mlp_backward_kernel(weights, head, acts, grad_logits, grad_z_extra, act_code):
    """Backward pass for a batch, summing contributions over the rows.

    ``grad_logits`` is the upstream on the logits (pre-scaled by the caller
    if a batch mean is wanted); ``grad_z_extra`` is an additional upstream
    injected directly on the last hidden activation (zeros when unused).
    Layer gradients are returned deepest-first; the wrapper reverses them.
    """
    n_layers = len(weights)
    z = acts[n_layers]
    grad_head = np.dot(grad_logits.T, z)
    gz = np.dot(grad_logits, head) + grad_z_extra
    gws = KernelList()
    gbs = KernelList()
    for l in range(n_layers - 1, -1, -1):
        a_out = acts[l + 1]
        a_in = acts[l]
        if act_code == RELU:
            gpre = np.where(a_out > 0.0, gz, 0.0)
        else:
            gpre = gz * (1.0 - a_out * a_out)
        gws.append(np.dot(gpre.T, a_in))
        gbs.append(gpre.sum(axis=0))
        gz = np.dot(gpre, weights[l])
    return gws, gbs, grad_head


@njit
def adam_update_kernel(p, g, m, v, lr_eff, beta1, beta2, eps, bc1, bc2,
                       wd_factor, adaptive):
    """One Adam-family update on a flat parameter view, in place.

    Decoupled weight decay is applied first as p *= wd_factor. When
    ``adaptive`` is false only the bias-corrected first moment is used
    (the rectified optimizer's early-step behavior); the second moment is
    still accumulated.
    """
    p *= wd_factor
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * g * g
    if adaptive:
        p -= lr_eff * (m / bc1) / (np.sqrt(v / bc2) + eps)
    else:
        p -= lr_eff * (m / bc1)
