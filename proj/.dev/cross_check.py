import glob
import numpy as np
import cvxpy as cp

worst = 0.0
bad = 0
for fname in sorted(glob.glob("/tmp/socp_*.txt")):
    with open(fname) as f:
        toks = f.read().split("\n")
    n, p, m, l, nsoc = map(int, toks[0].split())
    qs = list(map(int, toks[1].split()))
    c = np.fromstring(toks[2], sep=" ")
    A = np.fromstring(toks[3], sep=" ").reshape(p, n) if p else np.zeros((0, n))
    b = np.fromstring(toks[4], sep=" ") if p else np.zeros(0)
    G = np.fromstring(toks[5], sep=" ").reshape(m, n)
    h = np.fromstring(toks[6], sep=" ")
    obj_mine = float(toks[7])
    status_mine = int(toks[8])

    x = cp.Variable(n)
    cons = []
    if p:
        cons.append(A @ x == b)
    if l:
        cons.append(h[:l] - G[:l] @ x >= 0)
    off = l
    for q in qs:
        s = h[off:off + q] - G[off:off + q] @ x
        cons.append(cp.SOC(s[0], s[1:]))
        off += q
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    val = prob.solve()
    err = abs(val - obj_mine) / max(1.0, abs(val))
    worst = max(worst, err)
    if err > 1e-6 or status_mine != 0:
        bad += 1
        print(f"{fname}: cvxpy={val:.10g} mine={obj_mine:.10g} err={err:.2e} status={status_mine}")
print(f"checked {len(glob.glob('/tmp/socp_*.txt'))} instances, worst rel err {worst:.3e}, bad {bad}")
