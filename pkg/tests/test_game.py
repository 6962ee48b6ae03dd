import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wizrl import cards, game
from wizrl.cards import jester, make_card, wizard

from rules_oracle import oracle_admissible, oracle_lead_suit, oracle_trick_winner

BLUE, RED, GREEN, YELLOW = range(4)


def play_out_randomly(state, rng):
    """Drive a dealt round to evaluation with uniform random legal moves."""
    for k in range(4):
        p = (state.first_bidder + k) % 4
        game.submit_bid(state, p, int(rng.integers(0, state.round_number + 1)))
    while state.phase == game.PLAYING:
        p = state.next_player
        options = game.admissible(state.hands[p], state.current_trick)
        game.step_play(state, p, options[rng.integers(len(options))])
    return state


# --- dealing ---------------------------------------------------------------


def test_deal_round_15_deals_all_cards_with_no_trump():
    state = game.deal(np.random.default_rng(0), 15, 0)
    assert all(len(h) == 15 for h in state.hands)
    assert state.trump_card is None
    assert state.trump_suit is None
    assert state.undealt == []


def test_deal_round_1_reveals_trump_and_leaves_55_undealt():
    state = game.deal(np.random.default_rng(1), 1, 2)
    assert all(len(h) == 1 for h in state.hands)
    assert state.trump_card is not None
    assert len(state.undealt) == 55
    assert state.phase == game.BIDDING
    assert state.next_player == 2


def test_deal_special_trump_card_means_no_trump_suit():
    seen_jester = seen_wizard = False
    for seed in range(200):
        state = game.deal(np.random.default_rng(seed), 3, 0)
        if cards.is_jester(state.trump_card):
            assert state.trump_suit is None
            seen_jester = True
        elif cards.is_wizard(state.trump_card):
            assert state.trump_suit is None
            seen_wizard = True
        else:
            assert state.trump_suit == cards.suit_of(state.trump_card)
    assert seen_jester and seen_wizard


def test_deal_is_reproducible_from_seed():
    a = game.deal(np.random.default_rng(42), 7, 1)
    b = game.deal(np.random.default_rng(42), 7, 1)
    assert a.hands == b.hands and a.trump_card == b.trump_card


@pytest.mark.parametrize("bad_round", [0, 16, -3])
def test_deal_rejects_round_out_of_range(bad_round):
    with pytest.raises(ValueError):
        game.deal(np.random.default_rng(0), bad_round, 0)


# --- lead suit and admissibility -------------------------------------------


def test_lead_suit_of_empty_trick_is_none():
    assert game.lead_suit([]) is None


def test_lead_suit_skips_leading_jester():
    assert game.lead_suit([(0, jester(0)), (1, make_card(RED, 9))]) == RED


def test_lead_suit_none_after_leading_wizard():
    assert game.lead_suit([(0, wizard(0)), (1, make_card(RED, 9))]) is None


def test_admissible_must_follow_lead_but_specials_are_free():
    hand = [make_card(RED, 5), make_card(BLUE, 9), wizard(0)]
    trick = [(3, make_card(RED, 10))]
    assert set(game.admissible(hand, trick)) == {make_card(RED, 5), wizard(0)}


def test_admissible_unrestricted_when_cannot_follow():
    hand = [make_card(BLUE, 9), make_card(GREEN, 2)]
    trick = [(3, make_card(RED, 10))]
    assert set(game.admissible(hand, trick)) == set(hand)


def test_admissible_unrestricted_for_leader():
    hand = [make_card(BLUE, 9), make_card(RED, 2), jester(1)]
    assert set(game.admissible(hand, [])) == set(hand)


def test_admissible_rejects_empty_hand():
    with pytest.raises(ValueError):
        game.admissible([], [])


# --- trick resolution ------------------------------------------------------


def test_wizard_beats_highest_trump():
    trick = [
        (0, make_card(RED, 5)),
        (1, wizard(2)),
        (2, make_card(RED, 13)),
        (3, make_card(BLUE, 2)),
    ]
    assert game.trick_winner(trick, trump_suit=BLUE) == 1


def test_highest_lead_card_wins_without_trump():
    trick = [
        (0, make_card(RED, 5)),
        (1, make_card(RED, 9)),
        (2, jester(0)),
        (3, make_card(RED, 13)),
    ]
    assert game.trick_winner(trick, trump_suit=None) == 3


def test_all_jesters_first_player_wins():
    trick = [(2, jester(0)), (3, jester(1)), (0, jester(2)), (1, jester(3))]
    assert game.trick_winner(trick, trump_suit=GREEN) == 2


def test_trick_winner_rejects_incomplete_trick():
    with pytest.raises(ValueError):
        game.trick_winner([(0, make_card(RED, 5))], None)


# --- scoring ---------------------------------------------------------------


@pytest.mark.parametrize(
    "bid,tricks,expected", [(3, 3, 50), (0, 0, 20), (2, 5, -30), (5, 2, -30)]
)
def test_score_examples(bid, tricks, expected):
    assert game.score(bid, tricks) == expected


def test_score_sign_property():
    for x in range(16):
        assert game.score(x, x) > 0
        for y in range(16):
            if x != y:
                assert game.score(x, y) < 0


@pytest.mark.parametrize(
    "points,r,expected", [(30, 1, 1.0), (-10, 1, 0.0), (20, 1, 0.75)]
)
def test_normalize_reward_round_1(points, r, expected):
    assert game.normalize_reward(points, r) == pytest.approx(expected)


def test_normalize_reward_rejects_out_of_bounds():
    with pytest.raises(ValueError):
        game.normalize_reward(31, 1)
    with pytest.raises(ValueError):
        game.normalize_reward(-11, 1)


# --- round progression -----------------------------------------------------


def test_full_round_reaches_evaluation_and_trick_counts_add_up():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        r = int(rng.integers(1, 16))
        state = play_out_randomly(game.deal(rng, r, int(rng.integers(4))), rng)
        assert state.phase == game.EVALUATION
        assert sum(state.tricks_taken) == r
        assert len(state.completed_tricks) == r


def test_trick_winner_leads_next_trick():
    rng = np.random.default_rng(7)
    state = game.deal(rng, 5, 0)
    for k in range(4):
        game.submit_bid(state, k, 1)
    first_trick_players = []
    while len(state.completed_tricks) == 0:
        p = state.next_player
        first_trick_players.append(p)
        options = game.admissible(state.hands[p], state.current_trick)
        game.step_play(state, p, options[0])
    winner = game.trick_winner(state.completed_tricks[0], state.trump_suit)
    assert state.leader == winner
    assert state.next_player == winner


def test_step_play_rejects_inadmissible_card():
    state = game.deal(np.random.default_rng(3), 5, 0)
    for k in range(4):
        game.submit_bid(state, k, 1)
    p = state.next_player
    game.step_play(state, p, state.hands[p][0])
    p = state.next_player
    lead = game.lead_suit(state.current_trick)
    if lead is not None:
        illegal = [
            c
            for c in state.hands[p]
            if cards.is_standard(c) and cards.suit_of(c) != lead
        ]
        can_follow = any(
            cards.is_standard(c) and cards.suit_of(c) == lead
            for c in state.hands[p]
        )
        if illegal and can_follow:
            with pytest.raises(game.InadmissiblePlay):
                game.step_play(state, p, illegal[0])


def test_step_play_rejects_card_not_in_hand():
    state = game.deal(np.random.default_rng(3), 2, 0)
    for k in range(4):
        game.submit_bid(state, k, 0)
    p = state.next_player
    missing = next(c for c in range(60) if c not in state.hands[p])
    with pytest.raises(game.InadmissiblePlay):
        game.step_play(state, p, missing)


def test_bid_order_and_range_enforced():
    state = game.deal(np.random.default_rng(0), 3, 1)
    with pytest.raises(ValueError):
        game.submit_bid(state, 0, 1)  # out of turn
    with pytest.raises(ValueError):
        game.submit_bid(state, 1, 4)  # above round number


def test_card_conservation_throughout_a_round():
    rng = np.random.default_rng(11)
    state = game.deal(rng, 6, 2)
    for k in range(4):
        game.submit_bid(state, (2 + k) % 4, 1)
    while state.phase == game.PLAYING:
        everywhere = (
            [c for h in state.hands for c in h]
            + [c for _, c in state.current_trick]
            + [c for t in state.completed_tricks for _, c in t]
            + state.undealt
            + ([state.trump_card] if state.trump_card is not None else [])
        )
        assert sorted(everywhere) == list(range(60))
        p = state.next_player
        options = game.admissible(state.hands[p], state.current_trick)
        game.step_play(state, p, options[rng.integers(len(options))])


def test_incremental_trick_caches_match_recomputation():
    rng = np.random.default_rng(13)
    for _ in range(30):
        state = game.deal(rng, int(rng.integers(1, 8)), int(rng.integers(4)))
        for k in range(4):
            p = (state.first_bidder + k) % 4
            game.submit_bid(state, p, 0)
        while state.phase == game.PLAYING:
            p = state.next_player
            options = game.admissible(state.hands[p], state.current_trick)
            game.step_play(state, p, options[rng.integers(len(options))])
            if state.current_trick:
                assert state.trick_suit == game.lead_suit(state.current_trick)
                best = state.current_trick[0]
                for play in state.current_trick[1:]:
                    if game.beats(best[1], play[1], state.trump_suit):
                        best = play
                assert (state.trick_best_player, state.trick_best_card) == best


# --- oracle comparison -----------------------------------------------------

REDUCED_20 = (
    [make_card(s, r) for s in (BLUE, RED) for r in range(2, 10)]
    + [wizard(0), wizard(1), jester(0), jester(1)]
)


def test_trick_winner_matches_oracle_on_reduced_deck_enumeration():
    trumps = [BLUE, RED, None]
    count = 0
    for combo in itertools.combinations(REDUCED_20, 4):
        for perm in itertools.permutations(combo):
            trick = list(zip(range(4), perm))
            for trump in trumps:
                assert game.trick_winner(trick, trump) == oracle_trick_winner(
                    trick, trump
                )
            count += 1
    assert count == 20 * 19 * 18 * 17


@given(st.data())
@settings(max_examples=300, deadline=None)
def test_rules_match_oracle_on_random_hands_and_tricks(data):
    deck = cards.build_deck()
    n_trick = data.draw(st.integers(0, 3), label="trick_len")
    picked = data.draw(
        st.lists(
            st.sampled_from(deck), min_size=n_trick + 1, max_size=n_trick + 8, unique=True
        ),
        label="cards",
    )
    trick = list(zip(range(n_trick), picked[:n_trick]))
    hand = picked[n_trick:]
    trump = data.draw(st.sampled_from([BLUE, RED, GREEN, YELLOW, None]), label="trump")

    assert game.lead_suit(trick) == oracle_lead_suit(trick)
    result = game.admissible(hand, trick)
    assert set(result) == oracle_admissible(hand, trick)
    assert len(result) > 0 and set(result) <= set(hand)
    for c in hand:
        assert game.is_admissible(hand, trick, c) == (c in set(result))
    if n_trick == 3:
        full = trick + [(3, hand[0])]
        assert game.trick_winner(full, trump) == oracle_trick_winner(full, trump)
