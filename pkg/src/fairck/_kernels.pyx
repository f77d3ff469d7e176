# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled fixpoint and reachability kernels; mirror of ``_pykernels``."""

from array import array

from libc.stdlib cimport free, malloc


cdef int* _users_csr(int n, const int[:] ptr, const int[:] prems, int** uptr_out):
    # transpose premise lists: judgment -> rules using it, in rule order
    cdef int m = ptr.shape[0] - 1
    cdef int total = ptr[m]
    cdef int* uptr = <int*> malloc((n + 1) * sizeof(int))
    cdef int* fill = <int*> malloc((n + 1) * sizeof(int))
    cdef int* users = <int*> malloc((total + 1) * sizeof(int))
    cdef int r, k, j
    for j in range(n + 1):
        uptr[j] = 0
    for k in range(total):
        uptr[prems[k] + 1] += 1
    for j in range(n):
        uptr[j + 1] += uptr[j]
    for j in range(n + 1):
        fill[j] = uptr[j]
    for r in range(m):
        for k in range(ptr[r], ptr[r + 1]):
            j = prems[k]
            users[fill[j]] = r
            fill[j] += 1
    free(fill)
    uptr_out[0] = uptr
    return users


def lfp(int n, const int[:] concl, const int[:] ptr, const int[:] prems):
    cdef int m = concl.shape[0]
    cdef int r, c, j, k, head = 0, tail = 0
    cdef int* uptr
    cdef int* users = _users_csr(n, ptr, prems, &uptr)
    cdef int* need = <int*> malloc((m + 1) * sizeof(int))
    cdef int* queue = <int*> malloc((n + 1) * sizeof(int))
    member = bytearray(n)
    cdef unsigned char[:] mem = member
    via_arr = array("i", [-1]) * n
    cdef int[:] via = via_arr
    try:
        for r in range(m):
            need[r] = ptr[r + 1] - ptr[r]
            if need[r] == 0:
                c = concl[r]
                if not mem[c]:
                    mem[c] = 1
                    via[c] = r
                    queue[tail] = c
                    tail += 1
        while head < tail:
            j = queue[head]
            head += 1
            for k in range(uptr[j], uptr[j + 1]):
                r = users[k]
                need[r] -= 1
                if need[r] == 0:
                    c = concl[r]
                    if not mem[c]:
                        mem[c] = 1
                        via[c] = r
                        queue[tail] = c
                        tail += 1
    finally:
        free(uptr)
        free(users)
        free(need)
        free(queue)
    return member, via_arr


def gfp(int n, const int[:] concl, const int[:] ptr, const int[:] prems, bound=None):
    cdef int m = concl.shape[0]
    cdef int r, c, j, k, ok, head = 0, tail = 0
    alive_b = bytearray(b"\x01" * n) if bound is None else bytearray(bound)
    cdef unsigned char[:] alive = alive_b
    cdef int* uptr
    cdef int* users = _users_csr(n, ptr, prems, &uptr)
    cdef unsigned char* valid = <unsigned char*> malloc((m + 1) * sizeof(unsigned char))
    cdef int* support = <int*> malloc((n + 1) * sizeof(int))
    cdef int* queue = <int*> malloc((n + 1) * sizeof(int))
    try:
        for j in range(n):
            support[j] = 0
        for r in range(m):
            valid[r] = 0
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
        for j in range(n):
            if alive[j] and support[j] == 0:
                alive[j] = 0
                queue[tail] = j
                tail += 1
        while head < tail:
            j = queue[head]
            head += 1
            for k in range(uptr[j], uptr[j + 1]):
                r = users[k]
                if valid[r]:
                    valid[r] = 0
                    c = concl[r]
                    support[c] -= 1
                    if support[c] == 0 and alive[c]:
                        alive[c] = 0
                        queue[tail] = c
                        tail += 1
        removed = [queue[k] for k in range(tail)]
    finally:
        free(uptr)
        free(users)
        free(valid)
        free(support)
        free(queue)
    return alive_b, removed


def bfs(int n, const int[:] ptr, const int[:] adj, sources, blocked=None):
    cdef int u, v, k, s, head = 0, tail = 0
    seen_b = bytearray(n)
    cdef unsigned char[:] seen = seen_b
    blocked_b = bytearray(n) if blocked is None else bytearray(blocked)
    cdef unsigned char[:] blk = blocked_b
    parent_arr = array("i", [-1]) * n
    cdef int[:] parent = parent_arr
    cdef int* queue = <int*> malloc((n + 1) * sizeof(int))
    try:
        for s in sources:
            if not seen[s] and not blk[s]:
                seen[s] = 1
                parent[s] = s
                queue[tail] = s
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(ptr[u], ptr[u + 1]):
                v = adj[k]
                if not seen[v] and not blk[v]:
                    seen[v] = 1
                    parent[v] = u
                    queue[tail] = v
                    tail += 1
    finally:
        free(queue)
    return seen_b, parent_arr
