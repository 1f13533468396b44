"""Typed, versioned parameter tree with visibility-aware access.

The tree is Root -> Pages -> Folders -> Options. Two option kinds inject
children into the flattened view: a select option exposes the children of
its currently selected possibility, and a boolean option with children
exposes them while it is true. Leaf options are addressed by slash paths
such as ``"projector/slm/slm-resolution-x"``; children owned by a
possibility carry the possibility name in their path, e.g.
``"projector/slm/slm-type/multi-amp/amplitude-levels"``.

Deselecting a possibility hides its children but keeps their values, so
reselecting restores whatever was set earlier in the session. ``reset``
returns a node and all of its descendants (hidden ones included) to the
schema defaults.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field

from .errors import (
    HiddenPathError,
    OutOfRangeError,
    TypeMismatchError,
    UnknownPathError,
)


@dataclass(frozen=True, order=True)
class HierarchyVersion:
    """Schema version; ordering is lexicographic on (major, minor, patch)."""

    major: int
    minor: int
    patch: int

    def __str__(self):
        return f"{self.major}.{self.minor}.{self.patch}"


# --- leaf options -----------------------------------------------------------


@dataclass
class IntegerOption:
    name: str
    tooltip: str = ""
    minimum: int = 0
    maximum: int = 0
    default: int = 0
    value: int | None = None
    enabled: bool = True

    def __post_init__(self):
        if self.value is None:
            self.value = self.default
        if not self.minimum <= self.default <= self.maximum:
            raise ValueError(f"{self.name}: default outside [min, max]")


@dataclass
class DoubleOption:
    name: str
    tooltip: str = ""
    minimum: float = 0.0
    maximum: float = 0.0
    default: float = 0.0
    value: float | None = None
    enabled: bool = True

    def __post_init__(self):
        if self.value is None:
            self.value = self.default
        if not self.minimum <= self.default <= self.maximum:
            raise ValueError(f"{self.name}: default outside [min, max]")


@dataclass
class TextOption:
    name: str
    tooltip: str = ""
    default: str = ""
    value: str | None = None
    enabled: bool = True

    def __post_init__(self):
        if self.value is None:
            self.value = self.default


@dataclass
class PathOption:
    name: str
    tooltip: str = ""
    default: str = ""
    value: str | None = None
    enabled: bool = True

    def __post_init__(self):
        if self.value is None:
            self.value = self.default


@dataclass
class PathListOption:
    name: str
    tooltip: str = ""
    default: tuple[str, ...] = ()
    value: list[str] | None = None
    enabled: bool = True

    def __post_init__(self):
        if self.value is None:
            self.value = list(self.default)


@dataclass
class BooleanOption:
    name: str
    tooltip: str = ""
    default: bool = False
    value: bool | None = None
    enabled: bool = True

    def __post_init__(self):
        if self.value is None:
            self.value = self.default


@dataclass
class BooleanOptionWithChildren(BooleanOption):
    children: list = field(default_factory=list)


@dataclass
class Possibility:
    name: str
    tooltip: str = ""
    children: list = field(default_factory=list)


@dataclass
class SelectOption:
    name: str
    tooltip: str = ""
    possibilities: list[Possibility] = field(default_factory=list)
    default_index: int = 0
    selected_index: int | None = None
    enabled: bool = True

    def __post_init__(self):
        if self.selected_index is None:
            self.selected_index = self.default_index
        if not self.possibilities:
            raise ValueError(f"{self.name}: select option needs possibilities")
        if not 0 <= self.default_index < len(self.possibilities):
            raise ValueError(f"{self.name}: default index out of range")

    @property
    def selected(self) -> Possibility:
        return self.possibilities[self.selected_index]


OPTION_TYPES = (
    IntegerOption,
    DoubleOption,
    TextOption,
    PathOption,
    PathListOption,
    BooleanOption,
    BooleanOptionWithChildren,
    SelectOption,
)


# --- containers -------------------------------------------------------------


@dataclass
class Folder:
    name: str
    tooltip: str = ""
    options: list = field(default_factory=list)


@dataclass
class Page:
    name: str
    tooltip: str = ""
    folders: list[Folder] = field(default_factory=list)


@dataclass
class Root:
    name: str
    tooltip: str = ""
    pages: list[Page] = field(default_factory=list)


def _find(items, name):
    for item in items:
        if item.name == name:
            return item
    return None


@dataclass
class OptionTree:
    """A versioned Root with path-based access to its leaf options."""

    version: HierarchyVersion
    root: Root

    # -- resolution ----------------------------------------------------------

    def resolve_option(self, path: str, visible_only: bool = True):
        """Leaf option at ``path``; pass ``visible_only=False`` for schema lookups."""
        return self._resolve_option(path, check_visible=visible_only)

    def _resolve_option(self, path: str, check_visible: bool):
        """Return the leaf option at ``path``.

        ``check_visible`` distinguishes value access (which must not see
        children of deselected possibilities) from structural access.
        """
        segments = path.split("/") if path else []
        if len(segments) < 3:
            raise UnknownPathError(path)
        page = _find(self.root.pages, segments[0])
        if page is None:
            raise UnknownPathError(path)
        folder = _find(page.folders, segments[1])
        if folder is None:
            raise UnknownPathError(path)
        return self._descend(folder.options, segments[2:], path, check_visible)

    def _descend(self, options, segments, full_path, check_visible):
        option = _find(options, segments[0])
        if option is None or not isinstance(option, OPTION_TYPES):
            raise UnknownPathError(full_path)
        if len(segments) == 1:
            return option
        if isinstance(option, SelectOption):
            possibility = _find(option.possibilities, segments[1])
            if possibility is None or len(segments) < 3:
                raise UnknownPathError(full_path)
            if check_visible and option.selected is not possibility:
                raise HiddenPathError(full_path)
            return self._descend(possibility.children, segments[2:], full_path, check_visible)
        if isinstance(option, BooleanOptionWithChildren):
            if check_visible and not option.value:
                raise HiddenPathError(full_path)
            return self._descend(option.children, segments[1:], full_path, check_visible)
        raise UnknownPathError(full_path)

    def _resolve_node(self, path: str):
        """Resolve any node: "" is the root, prefixes name containers."""
        if path == "":
            return self.root
        segments = path.split("/")
        page = _find(self.root.pages, segments[0])
        if page is None:
            raise UnknownPathError(path)
        if len(segments) == 1:
            return page
        folder = _find(page.folders, segments[1])
        if folder is None:
            raise UnknownPathError(path)
        if len(segments) == 2:
            return folder
        # Option-level or deeper; possibilities are addressable for reset.
        node_list = folder.options
        rest = segments[2:]
        node = None
        while rest:
            node = _find(node_list, rest[0])
            if node is None:
                raise UnknownPathError(path)
            rest = rest[1:]
            if not rest:
                return node
            if isinstance(node, SelectOption):
                node = _find(node.possibilities, rest[0])
                if node is None:
                    raise UnknownPathError(path)
                rest = rest[1:]
                if not rest:
                    return node
                node_list = node.children
            elif isinstance(node, BooleanOptionWithChildren):
                node_list = node.children
            else:
                raise UnknownPathError(path)
        return node

    # -- value access ---------------------------------------------------------

    def get(self, path: str):
        """Current value of the visible leaf option at ``path``."""
        option = self._resolve_option(path, check_visible=True)
        return _read_value(option)

    def set(self, path: str, value) -> None:
        """Store ``value`` at ``path`` after type and range checks.

        A rejected set leaves the previous value intact. Setting a select
        or a boolean-with-children updates which children are visible.
        """
        option = self._resolve_option(path, check_visible=True)
        _write_value(option, path, value)

    def reset(self, path: str = "") -> None:
        """Return the node at ``path`` and every descendant to schema defaults."""
        _reset_node(self._resolve_node(path))

    # -- traversal -------------------------------------------------------------

    def iter_visible(self):
        """Yield (path, option) for visible leaf options, depth-first schema order."""
        for page in self.root.pages:
            for folder in page.folders:
                for option in folder.options:
                    yield from _walk_visible(option, f"{page.name}/{folder.name}")

    def flatten(self) -> list[tuple[str, object]]:
        """(path, value) pairs for the visible leaves, deterministic order."""
        return [(path, _read_value(opt)) for path, opt in self.iter_visible()]

    def search(self, query: str) -> list[str]:
        """Paths of visible leaves whose name or tooltip contains ``query``."""
        needle = query.lower()
        return [
            path
            for path, opt in self.iter_visible()
            if needle in opt.name.lower() or needle in opt.tooltip.lower()
        ]


def _walk_visible(option, prefix):
    path = f"{prefix}/{option.name}"
    yield path, option
    if isinstance(option, SelectOption):
        chosen = option.selected
        for child in chosen.children:
            yield from _walk_visible(child, f"{path}/{chosen.name}")
    elif isinstance(option, BooleanOptionWithChildren) and option.value:
        for child in option.children:
            yield from _walk_visible(child, path)


def _read_value(option):
    if isinstance(option, SelectOption):
        return option.selected.name
    if isinstance(option, PathListOption):
        return list(option.value)
    if isinstance(option, OPTION_TYPES):
        return option.value
    raise UnknownPathError(option.name)


def _write_value(option, path, value):
    if isinstance(option, SelectOption):
        if not isinstance(value, str):
            raise TypeMismatchError(path, "expected a possibility name")
        for index, possibility in enumerate(option.possibilities):
            if possibility.name == value:
                option.selected_index = index
                return
        names = [p.name for p in option.possibilities]
        raise OutOfRangeError(path, names[0], names[-1], value)
    if isinstance(option, IntegerOption):
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            raise TypeMismatchError(path, "expected an integer")
        value = int(value)
        if not option.minimum <= value <= option.maximum:
            raise OutOfRangeError(path, option.minimum, option.maximum, value)
        option.value = value
        return
    if isinstance(option, DoubleOption):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise TypeMismatchError(path, "expected a number")
        value = float(value)
        if not option.minimum <= value <= option.maximum:
            raise OutOfRangeError(path, option.minimum, option.maximum, value)
        option.value = value
        return
    if isinstance(option, (BooleanOptionWithChildren, BooleanOption)):
        if not isinstance(value, bool):
            raise TypeMismatchError(path, "expected a boolean")
        option.value = value
        return
    if isinstance(option, (TextOption, PathOption)):
        if not isinstance(value, str):
            raise TypeMismatchError(path, "expected text")
        option.value = value
        return
    if isinstance(option, PathListOption):
        if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
            raise TypeMismatchError(path, "expected a list of paths")
        option.value = list(value)
        return
    raise UnknownPathError(path)


def _reset_node(node):
    if isinstance(node, Root):
        for page in node.pages:
            _reset_node(page)
    elif isinstance(node, Page):
        for folder in node.folders:
            _reset_node(folder)
    elif isinstance(node, Folder):
        for option in node.options:
            _reset_node(option)
    elif isinstance(node, Possibility):
        for child in node.children:
            _reset_node(child)
    elif isinstance(node, SelectOption):
        node.selected_index = node.default_index
        for possibility in node.possibilities:
            _reset_node(possibility)
    elif isinstance(node, BooleanOptionWithChildren):
        node.value = node.default
        for child in node.children:
            _reset_node(child)
    elif isinstance(node, PathListOption):
        node.value = list(node.default)
    else:
        node.value = node.default
