"""Deterministic Dinic max-flow on real capacities.

Small and dependency free; node and edge order are fixed by insertion so
repeated runs return identical flows.
"""

from __future__ import annotations

from collections import deque


class FlowNetwork:
    def __init__(self, n_nodes: int, tol: float = 0.0):
        self.n = n_nodes
        self.tol = tol
        self.head = [[] for _ in range(n_nodes)]
        self.to: list[int] = []
        self.cap: list[float] = []

    def add_edge(self, u: int, v: int, cap: float) -> int:
        """Add ``u -> v`` with capacity ``cap``; returns the edge id (its reverse is ``id ^ 1``)."""
        eid = len(self.to)
        self.to.append(v)
        self.cap.append(float(cap))
        self.head[u].append(eid)
        self.to.append(u)
        self.cap.append(0.0)
        self.head[v].append(eid + 1)
        return eid

    def flow_on(self, eid: int) -> float:
        # residual capacity of the reverse edge is the pushed flow
        return self.cap[eid ^ 1]

    def _levels(self, s: int, t: int):
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        tol = self.tol
        while q:
            u = q.popleft()
            for e in self.head[u]:
                v = self.to[e]
                if level[v] < 0 and self.cap[e] > tol:
                    level[v] = level[u] + 1
                    q.append(v)
        return level if level[t] >= 0 else None

    def _augment(self, s: int, t: int, level, it) -> float:
        # iterative DFS along the level graph; returns the bottleneck pushed
        tol = self.tol
        path = []
        u = s
        while True:
            if u == t:
                push = min(self.cap[e] for e in path)
                for e in path:
                    self.cap[e] -= push
                    self.cap[e ^ 1] += push
                return push
            edges = self.head[u]
            advanced = False
            while it[u] < len(edges):
                e = edges[it[u]]
                v = self.to[e]
                if self.cap[e] > tol and level[v] == level[u] + 1:
                    path.append(e)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                if u == s:
                    return 0.0
                level[u] = -1  # dead end
                e = path.pop()
                u = self.to[e ^ 1]
                it[u] += 1

    def max_flow(self, s: int, t: int) -> float:
        total = 0.0
        while True:
            level = self._levels(s, t)
            if level is None:
                return total
            it = [0] * self.n
            while True:
                pushed = self._augment(s, t, level, it)
                if pushed <= self.tol:
                    break
                total += pushed
