"""Pure-Python cancellation kernels (fallback for the compiled module).

Both functions operate in place on the struct-of-arrays storage of a Dag and
return the number of nodes removed.  ``window`` < 0 means unbounded.
"""
from math import pi

NOT, H, RZ, CNOT, TOF = 0, 1, 2, 3, 4
TWO_PI = 2.0 * pi
EPS = 1e-10
_ARITY = (1, 1, 1, 2, 3)


def _unlink(g, kind, qs, nxt, prv, head, tail):
    for s in range(_ARITY[kind[g]]):
        e = 3 * g + s
        p = prv[e]
        n = nxt[e]
        if p >= 0:
            nxt[p] = n
        else:
            head[qs[e]] = n
        if n >= 0:
            prv[n] = p
        else:
            tail[qs[e]] = p
        nxt[e] = -1
        prv[e] = -1
    kind[g] = -1


def cancel_single_qubit(kind, qs, nxt, prv, head, tail, ang, sym, merge_cb, window=-1):
    removed = 0
    n_nodes = len(kind)
    for g0 in range(n_nodes):
        stack = [g0]
        while stack:
            g = stack.pop()
            k = kind[g]
            if k > RZ or k < 0:
                continue
            if k == RZ:
                if sym[g] < 0 and ang[g] == 0.0:
                    p = prv[3 * g]
                    _unlink(g, kind, qs, nxt, prv, head, tail)
                    removed += 1
                    if p >= 0 and 0 <= kind[p // 3] <= RZ:
                        stack.append(p // 3)
                    continue
                e = nxt[3 * g]
                steps = 0
                while e != -1:
                    if 0 <= window <= steps:
                        break
                    h = e // 3
                    kh = kind[h]
                    if kh == RZ:
                        e_after = nxt[e]
                        if sym[g] < 0 and sym[h] < 0:
                            a = ang[g] + ang[h]
                            if a >= TWO_PI:
                                a -= TWO_PI
                            if a < EPS or TWO_PI - a < EPS:
                                a = 0.0
                            ang[g] = a
                            zero = a == 0.0
                        else:
                            zero = merge_cb(g, h)
                        _unlink(h, kind, qs, nxt, prv, head, tail)
                        removed += 1
                        if zero:
                            p = prv[3 * g]
                            _unlink(g, kind, qs, nxt, prv, head, tail)
                            removed += 1
                            if p >= 0 and 0 <= kind[p // 3] <= RZ:
                                stack.append(p // 3)
                            break
                        e = e_after
                        continue
                    s = e - 3 * h
                    if kh == CNOT:
                        if s == 0:
                            e = nxt[e]
                            steps += 1
                            continue
                        # CNOT(a;q) Rz* CNOT(a;q) with only Rz between on wire a
                        e2 = nxt[e]
                        while e2 != -1 and kind[e2 // 3] == RZ:
                            e2 = nxt[e2]
                        if e2 == -1:
                            break
                        h2 = e2 // 3
                        if kind[h2] != CNOT or e2 != 3 * h2 + 1 or qs[3 * h2] != qs[3 * h]:
                            break
                        ec = nxt[3 * h]
                        while ec != -1 and kind[ec // 3] == RZ:
                            ec = nxt[ec]
                        if ec != 3 * h2:
                            break
                        e = nxt[e2]
                        steps += 3
                        continue
                    if kh == H:
                        # H(q) CNOT(a;q) H(q)
                        e1 = nxt[e]
                        if e1 == -1:
                            break
                        h1 = e1 // 3
                        if kind[h1] != CNOT or e1 != 3 * h1 + 1:
                            break
                        e2 = nxt[e1]
                        if e2 == -1 or kind[e2 // 3] != H:
                            break
                        e = nxt[e2]
                        steps += 3
                        continue
                    if kh == TOF and s < 2:
                        e = nxt[e]
                        steps += 1
                        continue
                    break
            else:
                e = nxt[3 * g]
                steps = 0
                while e != -1:
                    if 0 <= window <= steps:
                        break
                    h = e // 3
                    kh = kind[h]
                    if kh == k:
                        p = prv[3 * g]
                        _unlink(g, kind, qs, nxt, prv, head, tail)
                        _unlink(h, kind, qs, nxt, prv, head, tail)
                        removed += 2
                        if p >= 0 and 0 <= kind[p // 3] <= RZ:
                            stack.append(p // 3)
                        break
                    if k == NOT:
                        s = e - 3 * h
                        if (kh == CNOT and s == 1) or (kh == TOF and s == 2):
                            e = nxt[e]
                            steps += 1
                            continue
                    break
    return removed


def cancel_two_qubit(kind, qs, nxt, prv, head, tail, window=-1):
    removed = 0
    n_nodes = len(kind)
    for g0 in range(n_nodes):
        stack = [g0]
        while stack:
            g = stack.pop()
            if kind[g] != CNOT:
                continue
            c = qs[3 * g]
            t = qs[3 * g + 1]
            ec = nxt[3 * g]
            et = nxt[3 * g + 1]
            steps = 0
            while ec != -1 and et != -1:
                if 0 <= window <= steps:
                    break
                hc = ec // 3
                ht = et // 3
                if hc == ht:
                    if kind[hc] == CNOT and ec == 3 * hc and et == 3 * hc + 1:
                        pc = prv[3 * g]
                        pt = prv[3 * g + 1]
                        _unlink(g, kind, qs, nxt, prv, head, tail)
                        _unlink(hc, kind, qs, nxt, prv, head, tail)
                        removed += 2
                        if pc >= 0 and kind[pc // 3] == CNOT:
                            stack.append(pc // 3)
                        if pt >= 0 and kind[pt // 3] == CNOT:
                            stack.append(pt // 3)
                    break
                steps += 1
                kc = kind[hc]
                sc = ec - 3 * hc
                if kc == RZ:
                    ec = nxt[ec]
                    continue
                if kc == CNOT and sc == 0 and qs[3 * hc + 1] != t:
                    ec = nxt[ec]
                    continue
                if kc == TOF and sc < 2 and qs[3 * hc + 2] != t and qs[3 * hc + 1 - sc] != t:
                    ec = nxt[ec]
                    continue
                kt = kind[ht]
                st = et - 3 * ht
                if kt == NOT:
                    et = nxt[et]
                    continue
                if kt == CNOT and st == 1 and qs[3 * ht] != c:
                    et = nxt[et]
                    continue
                if kt == TOF and st == 2 and qs[3 * ht] != c and qs[3 * ht + 1] != c:
                    et = nxt[et]
                    continue
                if kt == H:
                    # H(t) CNOT(t;b) H(t), b != c
                    e1 = nxt[et]
                    if e1 == -1:
                        break
                    h1 = e1 // 3
                    if kind[h1] != CNOT or e1 != 3 * h1 or qs[3 * h1 + 1] == c:
                        break
                    e2 = nxt[e1]
                    if e2 == -1 or kind[e2 // 3] != H:
                        break
                    et = nxt[e2]
                    steps += 2
                    continue
                break
    return removed
