"""Pure-Python fixpoint and reachability kernels.

Reference implementation of the compiled ``_kernels`` module; both expose the
same functions with the same results.  Rule systems arrive in compressed form:
rule ``r`` concludes ``concl[r]`` from premises ``prems[ptr[r]:ptr[r+1]]``
(premises of one rule are distinct).  Graphs use the same CSR layout.
"""


def _users(n, ptr, prems):
    # judgment -> rules that have it as a premise, in rule order
    users = [[] for _ in range(n)]
    for r in range(len(ptr) - 1):
        for k in range(ptr[r], ptr[r + 1]):
            users[prems[k]].append(r)
    return users


def lfp(n, concl, ptr, prems):
    """Least fixpoint by premise counting.

    Returns ``(member, via)``: ``member[j]`` is 1 iff ``j`` is inductively
    derivable, ``via[j]`` is the rule of a minimal-height derivation (FIFO
    processing fires rules in non-decreasing height order), or -1.
    """
    m = len(concl)
    need = [ptr[r + 1] - ptr[r] for r in range(m)]
    users = _users(n, ptr, prems)
    member = bytearray(n)
    via = [-1] * n
    queue = []
    for r in range(m):
        if need[r] == 0:
            c = concl[r]
            if not member[c]:
                member[c] = 1
                via[c] = r
                queue.append(c)
    head = 0
    while head < len(queue):
        j = queue[head]
        head += 1
        for r in users[j]:
            need[r] -= 1
            if need[r] == 0:
                c = concl[r]
                if not member[c]:
                    member[c] = 1
                    via[c] = r
                    queue.append(c)
    return member, via


def gfp(n, concl, ptr, prems, bound=None):
    """Greatest fixpoint inside ``bound`` (all judgments if None).

    Returns ``(alive, removed)`` where ``removed`` lists pruned judgments of
    the bound in pruning order.
    """
    m = len(concl)
    alive = bytearray(b"\x01" * n) if bound is None else bytearray(bound)
    users = _users(n, ptr, prems)
    valid = bytearray(m)
    support = [0] * n
    for r in range(m):
        c = concl[r]
        if not alive[c]:
            continue
        ok = 1
        for k in range(ptr[r], ptr[r + 1]):
            if not alive[prems[k]]:
                ok = 0
                break
        if ok:
            valid[r] = 1
            support[c] += 1
    removed = []
    for j in range(n):
        if alive[j] and support[j] == 0:
            alive[j] = 0
            removed.append(j)
    head = 0
    while head < len(removed):
        j = removed[head]
        head += 1
        for r in users[j]:
            if valid[r]:
                valid[r] = 0
                c = concl[r]
                support[c] -= 1
                if support[c] == 0 and alive[c]:
                    alive[c] = 0
                    removed.append(c)
    return alive, removed


def bfs(n, ptr, adj, sources, blocked=None):
    """Breadth-first reachability from ``sources`` never entering ``blocked``.

    Returns ``(seen, parent)``; ``parent[v]`` is the BFS predecessor, ``v``
    itself for a source, -1 when unreached.
    """
    seen = bytearray(n)
    parent = [-1] * n
    queue = []
    for s in sources:
        if not seen[s] and not (blocked is not None and blocked[s]):
            seen[s] = 1
            parent[s] = s
            queue.append(s)
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        for k in range(ptr[u], ptr[u + 1]):
            v = adj[k]
            if not seen[v] and not (blocked is not None and blocked[v]):
                seen[v] = 1
                parent[v] = u
                queue.append(v)
    return seen, parent
