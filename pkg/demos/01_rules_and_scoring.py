"""
Dealing a round and playing it out by the rules
===============================================

A walk through the game core: deal a five-card round, look at what each
player holds, play one trick step by step while watching the admissible
sets change, and finish with the scoring rule.
"""

import numpy as np

from wizrl import cards, game

rng = np.random.default_rng(7)

# Deal round 5: four hands of five cards and a face-up trump card.
state = game.deal(rng, round_number=5, first_bidder=0)
print(f"trump card: {cards.card_name(state.trump_card)}"
      f"  -> trump suit {state.trump_suit}")
for p in range(4):
    names = ", ".join(cards.card_name(c) for c in sorted(state.hands[p]))
    print(f"player {p} holds: {names}")

# Everyone bids. Bids are public, in seating order from the first bidder.
for i in range(4):
    p = (state.first_bidder + i) % 4
    game.submit_bid(state, p, bid=1)
print(f"bids: {state.bids}")

# Play one full trick. The admissible set starts as the whole hand for
# the leader; once a standard card sets the lead suit, followers must
# follow it unless they are void (wizards and jesters are always legal).
print("\nfirst trick:")
while len(state.completed_tricks) == 0:
    p = state.next_player
    legal = game.admissible(state.hands[p], state.current_trick)
    choice = legal[0]
    print(f"  player {p} may play {[cards.card_name(c) for c in legal]}"
          f" -> plays {cards.card_name(choice)}")
    game.step_play(state, p, choice)

winner = state.completed_tricks[0]
print(f"trick was {[(p, cards.card_name(c)) for p, c in winner]}")
print(f"tricks taken so far: {state.tricks_taken}")

# The same trick under every trump designation. Precedence is: first
# wizard, else highest trump, else highest card of the lead suit, else
# the first player when everyone threw a jester.
print("\nsame trick, all trump designations:")
for trump in (0, 1, 2, 3, cards.NO_TRUMP):
    w = game.trick_winner(winner, trump)
    print(f"  trump={trump}: player {w} wins")

# Scoring: 20 + 10x for an exact bid of x, else -10 per trick of error.
print("\nscore(bid, tricks) for bids/tricks 0..3:")
for bid in range(4):
    row = [game.score(bid, tricks) for tricks in range(4)]
    print(f"  bid {bid}: {row}")

# Rewards used for learning are the same scores squashed into [0, 1]
# by the round's fixed bounds.
print(f"\nnormalized rewards in round 5: "
      f"exact 3-bid {game.normalize_reward(game.score(3, 3), 5):.3f}, "
      f"miss by five {game.normalize_reward(game.score(5, 0), 5):.3f}")
