"""The 60-card Wizard deck.

Cards are plain integers 0..59 so they can be used directly as one-hot
indices and numpy array positions:

* ``0..51``  -- standard cards, ``suit * 13 + (rank - 2)`` with ranks 2..14
* ``52..55`` -- the four wizards
* ``56..59`` -- the four jesters

Suits are numbered 0..3 in the fixed order blue, red, green, yellow.
"""

from __future__ import annotations

NUM_SUITS = 4
NUM_RANKS = 13
MIN_RANK = 2
MAX_RANK = 14

NUM_STANDARD = NUM_SUITS * NUM_RANKS  # 52
WIZARD_BASE = NUM_STANDARD            # 52..55
JESTER_BASE = NUM_STANDARD + 4        # 56..59
NUM_CARDS = 60

SUIT_NAMES = ("blue", "red", "green", "yellow")

NO_TRUMP = None  # trump designation for rounds without a trump suit


def make_card(suit: int, rank: int) -> int:
    """Canonical index of the standard card with the given suit and rank."""
    if not 0 <= suit < NUM_SUITS:
        raise ValueError(f"suit must be 0..3, got {suit}")
    if not MIN_RANK <= rank <= MAX_RANK:
        raise ValueError(f"rank must be 2..14, got {rank}")
    return suit * NUM_RANKS + (rank - MIN_RANK)


def wizard(i: int) -> int:
    """Canonical index of wizard ``i`` (0..3)."""
    if not 0 <= i < 4:
        raise ValueError(f"wizard index must be 0..3, got {i}")
    return WIZARD_BASE + i


def jester(i: int) -> int:
    """Canonical index of jester ``i`` (0..3)."""
    if not 0 <= i < 4:
        raise ValueError(f"jester index must be 0..3, got {i}")
    return JESTER_BASE + i


def is_standard(card: int) -> bool:
    return card < NUM_STANDARD


def is_wizard(card: int) -> bool:
    return WIZARD_BASE <= card < JESTER_BASE


def is_jester(card: int) -> bool:
    return JESTER_BASE <= card < NUM_CARDS


def suit_of(card: int) -> int:
    """Suit of a standard card. Undefined for wizards and jesters."""
    return card // NUM_RANKS


def rank_of(card: int) -> int:
    """Rank (2..14) of a standard card. Undefined for wizards and jesters."""
    return card % NUM_RANKS + MIN_RANK


def build_deck() -> list[int]:
    """All 60 cards in canonical index order."""
    return list(range(NUM_CARDS))


def card_name(card: int) -> str:
    """Human-readable name, e.g. ``"red-9"``, ``"wizard-0"``."""
    if is_wizard(card):
        return f"wizard-{card - WIZARD_BASE}"
    if is_jester(card):
        return f"jester-{card - JESTER_BASE}"
    return f"{SUIT_NAMES[suit_of(card)]}-{rank_of(card)}"


def parse_card(name: str) -> int:
    """Inverse of :func:`card_name`."""
    head, _, tail = name.partition("-")
    if not tail:
        raise ValueError(f"malformed card name: {name!r}")
    if head == "wizard":
        return wizard(int(tail))
    if head == "jester":
        return jester(int(tail))
    if head not in SUIT_NAMES:
        raise ValueError(f"unknown suit in card name: {name!r}")
    return make_card(SUIT_NAMES.index(head), int(tail))
