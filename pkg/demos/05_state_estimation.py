"""
Guessing the hidden hands
=========================

Mid-round, a player knows their own cards, the trump card, and every
card already played -- the rest of the 60-card deck is hidden across
the deck and the other three hands. The card-location table makes that
knowledge explicit: one row per card, one column per location (deck,
four hands, four played piles).

Completing the unknown rows consistently with the known capacities is
"determinization": uniform_sample does it uniformly, nn_sample follows
a learned per-card location distribution.
"""

import numpy as np

from wizrl import agents, env, game, state_model

rng = np.random.default_rng(5)

# Build a round-3 position after five plays.
state = game.deal(rng, round_number=3, first_bidder=0)
for p in range(4):
    game.submit_bid(state, p, 1)
for _ in range(5):
    p = state.next_player
    legal = game.admissible(state.hands[p], state.current_trick)
    game.step_play(state, p, legal[int(rng.integers(len(legal)))])

viewer = state.next_player
know = state_model.knowledge_of(state, viewer)
known_rows = int((know.table.sum(axis=1) > 0).sum())
print(f"viewer is player {viewer}; {known_rows} of 60 card locations known")
print(f"location capacities: {know.capacity}"
      f"  (deck, hands 0-3, played 0-3)")

# The ground truth is one valid completion; uniform samples are others.
truth = state_model.truth_table(state)
sample = state_model.uniform_sample(know, rng)
agree = int((sample.argmax(axis=1) == truth.argmax(axis=1)).sum())
print(f"one uniform sample agrees with the truth on {agree}/60 rows"
      f" (the {known_rows} known rows always match)")

# Where could the strongest hidden cards be? Frequencies over many
# uniform samples recover the capacity-proportional distribution.
hidden = np.flatnonzero(know.table.sum(axis=1) == 0)
card = int(hidden[-1])
counts = np.zeros(state_model.NUM_LOCATIONS)
for _ in range(2_000):
    counts[state_model.uniform_sample(know, rng).argmax(axis=1)[card]] += 1
free = know.capacity - know.table.sum(axis=0).astype(np.int64)
print(f"\ncard {card}: sampled location frequencies vs free capacity")
print(f"  frequencies: {(counts / counts.sum()).round(3)}")
print(f"  capacity:    {(free / free.sum()).round(3)}")

# A state estimator learns sharper row distributions from observations.
# Zero-initialized it predicts exactly uniform rows -- the reference
# point a short training run improves on.
uniform_rows = state_model.StateEstimator().predict(
    env.encode_playing(state, viewer)[0]
)
print(f"\nzero-initialized estimator row: {uniform_rows[card].round(4)}")

train_rng = np.random.default_rng(6)
mix = [agents.RandomAgent() for _ in range(4)]
obs, locs = state_model.generate_estimator_samples(mix, round_number=3,
                                                   n_rounds=400, rng=train_rng)
estimator = state_model.StateEstimator(rng=np.random.default_rng(8))
buffer = state_model.EstimatorBuffer(len(obs), env.PLAYING_OBS_DIM)
for o, l in zip(obs, locs):
    buffer.add(o, l)
learner = state_model.EstimatorLearner(estimator, buffer,
                                       rng=np.random.default_rng(7),
                                       batch_size=256)
print("\nestimator cross-entropy while training:")
for step in range(200):
    loss = learner.train_step()
    if step % 40 == 0:
        print(f"  step {step:>3}: {loss:.4f}")

observation, _ = env.encode_playing(state, viewer)
probs = estimator.predict(observation)
nn_table = state_model.nn_sample(know, probs, rng)
print(f"\nnn_sample completion is consistent:"
      f" column sums {nn_table.sum(axis=0).astype(int)} == capacities")
print(f"estimator row entropy, known card {state.hands[viewer][0]}:"
      f" {-(probs[state.hands[viewer][0]] * np.log(probs[state.hands[viewer][0]])).sum():.3f} nats"
      f" (uniform would be {np.log(9):.3f})")
