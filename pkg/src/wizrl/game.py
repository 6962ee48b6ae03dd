"""Rules engine for a single Wizard round.

One round for four players: deal ``r`` cards each, reveal a trump card
(except in round 15), collect one bid per player, play ``r`` tricks, and
score each player ``20 + 10 * bid`` for an exact bid or ``-10 * |bid -
tricks|`` otherwise.

``RoundState`` is advanced in place by :func:`submit_bid` and
:func:`step_play`; use :meth:`RoundState.clone` before simulating
alternative continuations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cards

NUM_PLAYERS = 4
MAX_ROUND = 15

# Round phases.
DEALING = "dealing"
BIDDING = "bidding"
PLAYING = "playing"
EVALUATION = "evaluation"


class InadmissiblePlay(ValueError):
    """A card was played that the rules do not allow."""


Play = tuple[int, int]  # (player, card)


@dataclass
class RoundState:
    """Complete ground-truth state of one round."""

    round_number: int
    first_bidder: int
    hands: list[list[int]]
    trump_card: int | None
    trump_suit: int | None
    undealt: list[int]
    phase: str = BIDDING
    bids: list[int | None] = field(default_factory=lambda: [None] * NUM_PLAYERS)
    tricks_taken: list[int] = field(default_factory=lambda: [0] * NUM_PLAYERS)
    current_trick: list[Play] = field(default_factory=list)
    completed_tricks: list[list[Play]] = field(default_factory=list)
    leader: int = 0
    next_player: int = 0
    # Incremental per-trick caches, kept consistent with current_trick.
    trick_suit: int | None = None
    trick_suit_locked: bool = False
    trick_best_player: int | None = None
    trick_best_card: int | None = None

    def clone(self) -> "RoundState":
        """Independent copy; cheaper than deepcopy for the flat structure."""
        return RoundState(
            round_number=self.round_number,
            first_bidder=self.first_bidder,
            hands=[list(h) for h in self.hands],
            trump_card=self.trump_card,
            trump_suit=self.trump_suit,
            undealt=list(self.undealt),
            phase=self.phase,
            bids=list(self.bids),
            tricks_taken=list(self.tricks_taken),
            current_trick=list(self.current_trick),
            completed_tricks=[list(t) for t in self.completed_tricks],
            leader=self.leader,
            next_player=self.next_player,
            trick_suit=self.trick_suit,
            trick_suit_locked=self.trick_suit_locked,
            trick_best_player=self.trick_best_player,
            trick_best_card=self.trick_best_card,
        )

    def bidding_position(self, player: int) -> int:
        """Position of ``player`` in the bidding order (0 bids first)."""
        return (player - self.first_bidder) % NUM_PLAYERS


def deal(rng: np.random.Generator, round_number: int, first_bidder: int) -> RoundState:
    """Shuffle, deal ``round_number`` cards per player and reveal the trump.

    Uses the generator's Fisher-Yates shuffle so deals are reproducible
    from the seed. In round 15 all 60 cards are dealt and no trump suit
    exists; otherwise the next undealt card is revealed and its suit
    becomes trump (no trump if it is a wizard or jester).
    """
    if not 1 <= round_number <= MAX_ROUND:
        raise ValueError(f"round must be 1..{MAX_ROUND}, got {round_number}")
    if not 0 <= first_bidder < NUM_PLAYERS:
        raise ValueError(f"first_bidder must be 0..3, got {first_bidder}")

    deck = np.arange(cards.NUM_CARDS)
    rng.shuffle(deck)
    deck = deck.tolist()

    r = round_number
    hands = [deck[p * r:(p + 1) * r] for p in range(NUM_PLAYERS)]
    if r < MAX_ROUND:
        trump_card = deck[NUM_PLAYERS * r]
        undealt = deck[NUM_PLAYERS * r + 1:]
        if cards.is_standard(trump_card):
            trump_suit = cards.suit_of(trump_card)
        else:
            trump_suit = cards.NO_TRUMP
    else:
        trump_card = None
        trump_suit = cards.NO_TRUMP
        undealt = []

    return RoundState(
        round_number=r,
        first_bidder=first_bidder,
        hands=hands,
        trump_card=trump_card,
        trump_suit=trump_suit,
        undealt=undealt,
        phase=BIDDING,
        leader=first_bidder,
        next_player=first_bidder,
    )


def lead_suit(trick: list[Play]) -> int | None:
    """Suit to follow: first standard card's suit, skipping leading jesters.

    None for an empty trick, once a wizard appears before any standard
    card, or while only jesters have been played.
    """
    for _, card in trick:
        if cards.is_wizard(card):
            return None
        if cards.is_jester(card):
            continue
        return cards.suit_of(card)
    return None


def beats(best: int, challenger: int, trump_suit: int | None) -> bool:
    """Whether ``challenger`` takes over a trick currently won by ``best``."""
    if cards.is_wizard(best):
        return False
    if cards.is_wizard(challenger):
        return True
    if cards.is_jester(challenger):
        return False
    if cards.is_jester(best):
        return True
    if cards.suit_of(challenger) == cards.suit_of(best):
        return cards.rank_of(challenger) > cards.rank_of(best)
    return trump_suit is not None and cards.suit_of(challenger) == trump_suit


def trick_winner(trick: list[Play], trump_suit: int | None) -> int:
    """Winner of a complete 4-card trick.

    First wizard, else highest trump, else highest lead-suit card, else
    (all jesters) the first player.
    """
    if len(trick) != NUM_PLAYERS:
        raise ValueError(f"trick must have 4 plays, got {len(trick)}")
    best_player, best_card = trick[0]
    for player, card in trick[1:]:
        if beats(best_card, card, trump_suit):
            best_player, best_card = player, card
    return best_player


def admissible(hand: list[int], trick: list[Play]) -> list[int]:
    """Cards from ``hand`` that may legally be played against ``trick``.

    Lead-suit cards must be followed when held; wizards and jesters are
    always playable; a hand without the lead suit is unrestricted.
    Never empty.
    """
    if not hand:
        raise ValueError("admissible() requires a non-empty hand")
    lead = lead_suit(trick)
    if lead is None:
        return list(hand)
    can_follow = []
    specials = []
    for c in hand:
        if c < cards.NUM_STANDARD:
            if c // cards.NUM_RANKS == lead:
                can_follow.append(c)
        else:
            specials.append(c)
    if not can_follow:
        return list(hand)
    return can_follow + specials


def is_admissible(hand: list[int], trick: list[Play], card: int) -> bool:
    """Single-card admissibility check, equivalent to membership in
    :func:`admissible` but without building the list."""
    if card not in hand:
        return False
    if not cards.is_standard(card):
        return True
    lead = lead_suit(trick)
    if lead is None or cards.suit_of(card) == lead:
        return True
    return not any(
        c < cards.NUM_STANDARD and c // cards.NUM_RANKS == lead for c in hand
    )


def score(bid: int, tricks: int) -> int:
    """Round points: ``20 + 10 * bid`` on an exact bid, else ``-10 * |diff|``."""
    if bid < 0 or tricks < 0:
        raise ValueError("bid and tricks must be non-negative")
    if bid == tricks:
        return 20 + 10 * bid
    return -10 * abs(bid - tricks)


def reward_bounds(round_number: int) -> tuple[int, int]:
    """Theoretical (min, max) points attainable in the given round."""
    return -10 * round_number, 20 + 10 * round_number


def normalize_reward(points: int, round_number: int) -> float:
    """Map round points onto [0, 1] using the theoretical per-round bounds."""
    lo, hi = reward_bounds(round_number)
    if not lo <= points <= hi:
        raise ValueError(
            f"points {points} outside [{lo}, {hi}] for round {round_number}"
        )
    return (points - lo) / (hi - lo)


def submit_bid(state: RoundState, player: int, bid: int) -> RoundState:
    """Record ``player``'s bid; flips to the playing phase after the fourth."""
    if state.phase != BIDDING:
        raise ValueError(f"cannot bid in phase {state.phase!r}")
    if player != state.next_player:
        raise ValueError(f"it is player {state.next_player}'s turn to bid")
    if not 0 <= bid <= state.round_number:
        raise ValueError(f"bid must be 0..{state.round_number}, got {bid}")
    state.bids[player] = bid
    state.next_player = (player + 1) % NUM_PLAYERS
    if state.next_player == state.first_bidder:
        state.phase = PLAYING
        state.leader = state.first_bidder
        state.next_player = state.first_bidder
    return state


def step_play(state: RoundState, player: int, card: int) -> RoundState:
    """Play ``card`` for ``player``, resolving the trick on its 4th card.

    The trick winner leads the next trick; after the last trick the phase
    becomes evaluation. Raises :class:`InadmissiblePlay` for any card the
    rules do not allow, so masked agents must never trigger it.
    """
    if state.phase != PLAYING:
        raise ValueError(f"cannot play in phase {state.phase!r}")
    if player != state.next_player:
        raise ValueError(f"it is player {state.next_player}'s turn to play")
    hand = state.hands[player]
    if card not in hand:
        raise InadmissiblePlay(f"player {player} does not hold {cards.card_name(card)}")
    if state.trick_suit is not None and cards.is_standard(card):
        if cards.suit_of(card) != state.trick_suit and any(
            c < cards.NUM_STANDARD and c // cards.NUM_RANKS == state.trick_suit
            for c in hand
        ):
            raise InadmissiblePlay(
                f"player {player} must follow {cards.SUIT_NAMES[state.trick_suit]}"
            )

    hand.remove(card)
    trick = state.current_trick
    trick.append((player, card))

    # Incremental lead-suit and current-winner bookkeeping.
    if not state.trick_suit_locked:
        if cards.is_wizard(card):
            state.trick_suit_locked = True
        elif cards.is_standard(card):
            state.trick_suit = cards.suit_of(card)
            state.trick_suit_locked = True
    if state.trick_best_card is None or beats(state.trick_best_card, card, state.trump_suit):
        state.trick_best_card = card
        state.trick_best_player = player

    if len(trick) == NUM_PLAYERS:
        winner = state.trick_best_player
        state.tricks_taken[winner] += 1
        state.completed_tricks.append(trick)
        state.current_trick = []
        state.trick_suit = None
        state.trick_suit_locked = False
        state.trick_best_card = None
        state.trick_best_player = None
        state.leader = winner
        state.next_player = winner
        if len(state.completed_tricks) == state.round_number:
            state.phase = EVALUATION
    else:
        state.next_player = (player + 1) % NUM_PLAYERS
    return state


def round_scores(state: RoundState) -> list[int]:
    """Final points per player once the round reached evaluation."""
    if state.phase != EVALUATION:
        raise ValueError("round is not finished")
    return [score(state.bids[p], state.tricks_taken[p]) for p in range(NUM_PLAYERS)]
