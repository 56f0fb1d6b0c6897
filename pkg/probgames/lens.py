from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from probgames.errors import InterfaceMismatch, UnknownStrategy


@dataclass(frozen=True)
class Lens:
    """A view/update pair between boundaries (X, S) and (Y, R).

    ``source`` and ``target`` optionally describe the two boundaries so
    composition can refuse mismatched interfaces; ``None`` skips the check.
    """

    view: Callable[[Any], Any]
    update: Callable[[Any, Any], Any]
    source: Optional[tuple] = None
    target: Optional[tuple] = None


def identity_lens(boundary: Optional[tuple] = None) -> Lens:
    return Lens(view=lambda x: x, update=lambda x, r: r, source=boundary, target=boundary)


def lens_compose(first: Lens, second: Lens) -> Lens:
    """
    Composes ``first`` : (X, S) -> (Y', R') with ``second`` : (Y', R') -> (Y, R).

    Args:
        first: Lens applied first on the forward pass
        second: Lens applied second on the forward pass

    Returns:
        Lens: view = second.view after first.view; update(x, r) =
        first.update(x, second.update(first.view(x), r))

    Raises:
        InterfaceMismatch: If both middle boundaries are declared and differ
    """
    if first.target is not None and second.source is not None and first.target != second.source:
        raise InterfaceMismatch(
            f"Cannot compose lenses: {first.target!r} does not match {second.source!r}"
        )

    def view(x):
        return second.view(first.view(x))

    def update(x, r):
        return first.update(x, second.update(first.view(x), r))

    return Lens(view=view, update=update, source=first.source, target=second.target)


def embed_pair(f: Callable, g: Callable, source: Optional[tuple] = None,
               target: Optional[tuple] = None) -> Lens:
    """Embeds a forward map f and a backward map g as a lens ignoring its state on update."""
    return Lens(view=f, update=lambda x, r: g(r), source=source, target=target)


def game_lens(game, strategy) -> Lens:
    """
    The lens (play(strategy, -), coutility(strategy, -, -)) of a game.

    Determinised games carry ``None`` for carriers they cannot enumerate;
    strategy membership is then not checked and the matching boundary is
    left undeclared.
    """
    if game.strategies is not None and strategy not in game.strategies:
        raise UnknownStrategy(f"{strategy!r} is not a strategy of {game.name}")
    source = None if game.states is None else (frozenset(game.states), game.coutility_alg)
    target = None if game.moves is None else (frozenset(game.moves), game.utility_alg)
    return Lens(
        view=lambda x: game.play(strategy, x),
        update=lambda x, r: game.coutility(strategy, x, r),
        source=source,
        target=target,
    )


def lenses_agree(a: Lens, b: Lens, states: Iterable, samples: Iterable) -> bool:
    """Pointwise comparison of views over states and updates over states x samples."""
    samples = list(samples)
    for x in states:
        if a.view(x) != b.view(x):
            return False
        for r in samples:
            if a.update(x, r) != b.update(x, r):
                return False
    return True
