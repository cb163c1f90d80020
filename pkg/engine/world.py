"""Worlds: a shared candidate precondition with location-labelled current states."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional

from seplogic.formula import PureAtom, SymbolicHeap, eq
from seplogic.ops import normalize
from seplogic.pure import Verdict, satisfiable
from seplogic.terms import FreshNames, Var, anchor_of

# location of posts that finished one loop iteration
ITERATION_END = -1


@dataclass
class Post:
    loc: int
    heap: SymbolicHeap
    id: int
    done: bool = False

    def __str__(self) -> str:
        return f"post#{self.id}@{self.loc}: {self.heap}"


@dataclass
class World:
    pre: SymbolicHeap
    posts: List[Post] = field(default_factory=list)
    index: int = 0
    next_post: int = 0

    def add_post(self, loc: int, heap: SymbolicHeap) -> Post:
        post = Post(loc, heap, self.next_post)
        self.next_post += 1
        self.posts.append(post)
        return post

    def post(self, post_id: int) -> Post:
        return next(p for p in self.posts if p.id == post_id)

    def at(self, loc: int) -> Iterator[Post]:
        return (p for p in self.posts if p.loc == loc)

    def pending(self) -> List[Post]:
        return sorted((p for p in self.posts if not p.done), key=lambda p: (p.loc, p.id))

    def copy(self, index: int) -> "World":
        posts = [Post(p.loc, p.heap, p.id, p.done) for p in self.posts]
        return World(self.pre, posts, index, self.next_post)

    def strengthen(self, atom: PureAtom, names: FreshNames) -> Optional["World"]:
        """Conjoins `atom` to the precondition and every post; None when the
        precondition becomes unsatisfiable."""
        pre = self.pre.with_pure(atom)
        if satisfiable(pre) == Verdict.UNSAT:
            return None
        self.pre = pre
        self.posts = [
            Post(p.loc, normalize(p.heap.with_pure(atom), names), p.id, p.done)
            for p in self.posts
        ]
        self.posts = [p for p in self.posts if satisfiable(p.heap) != Verdict.UNSAT]
        return self

    def share(self, missing: SymbolicHeap, shared: bool = True):
        """Adds a learned missing part to the precondition and, when `shared`,
        to every post."""
        self.pre = self.pre.star(missing)
        if not shared:
            return
        self.posts = [Post(p.loc, p.heap.star(missing), p.id, p.done) for p in self.posts]
        self.posts = [p for p in self.posts if satisfiable(p.heap) != Verdict.UNSAT]

    def exit_posts(self, exit_loc: int) -> List[SymbolicHeap]:
        return [p.heap for p in self.posts if p.loc == exit_loc]

    def render(self) -> str:
        lines = [f"world#{self.index} pre: {self.pre}"]
        lines += [f"  {p}" for p in self.posts]
        return "\n".join(lines)


def initial_world(variables: Iterable[Var], entry: int = 0) -> World:
    """`(true, x1 = X1 /\\ ... /\\ xn = Xn)` at the entry location."""
    world = World(SymbolicHeap())
    world.add_post(entry, SymbolicHeap.of([eq(v, anchor_of(v)) for v in variables]))
    return world
