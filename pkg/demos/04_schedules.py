#!/usr/bin/env python3
"""Token-removal schedules: constant, linearly decreasing, and staged.

Constant removes the same count every block. Linear removes twice as many
at the first block, tapering to zero (the floor in its formula loses a few
tokens versus the nominal total). Staged schedules keep a fixed fraction of
whatever is left at a few chosen blocks.
"""

from tokclust import ConstantSchedule, LinearSchedule, StageSchedule, schedule_removals

blocks = 12
t = 16

constant = ConstantSchedule(t=t, n_blocks=blocks)
linear = LinearSchedule(t=t, n_blocks=blocks)

print(f"per-block removals over {blocks} blocks (t={t}):")
print("  block :", "  ".join(f"{l:>3}" for l in range(blocks)))
const_vals = [schedule_removals(constant, l) for l in range(blocks)]
lin_vals = [schedule_removals(linear, l) for l in range(blocks)]
print("  const :", "  ".join(f"{v:>3}" for v in const_vals), f" total {sum(const_vals)}")
print("  linear:", "  ".join(f"{v:>3}" for v in lin_vals), f" total {sum(lin_vals)}")
print(f"  (linear's floor loses {t * blocks - sum(lin_vals)} tokens vs the nominal {t * blocks})")

print("\ntoken counts through the blocks, starting from 196:")
for name, sched in (("const", constant), ("linear", linear)):
    n = 196
    trace = [n]
    for l in range(blocks):
        n = max(1, n - schedule_removals(sched, l, n_current=n))
        trace.append(n)
    print(f"  {name:>6}: {trace}")

print("\nstaged keep-rate schedule at blocks 3/6/9:")
for rate in (0.25, 0.5, 0.7, 0.9):
    sched = StageSchedule(blocks=(3, 6, 9), keep_rate=rate)
    n = 196
    kept = []
    for l in range(blocks):
        n -= schedule_removals(sched, l, n_current=n)
        if l in sched.blocks:
            kept.append(n)
    print(f"  keep {int(rate * 100):>2}% -> stage counts {kept}")
