/**
 * Token-removal schedule arithmetic, mirroring the core toolkit exactly:
 * constant removes t per block, linear removes floor(2t - 2tl/(L-1)), and
 * stage schedules keep round-half-up(keepRate * current) at listed blocks.
 */

export type Schedule =
  | { kind: 'constant'; t: number; blocks: number }
  | { kind: 'linear'; t: number; blocks: number }
  | { kind: 'stages'; blocks: readonly number[]; keepRate: number }

export class ScheduleError extends Error {}

function roundHalfUp(x: number): number {
  return Math.floor(x + 0.5)
}

export function scheduleRemovals(
  schedule: Schedule,
  block: number,
  nCurrent?: number,
): number {
  if (!Number.isInteger(block)) throw new ScheduleError(`block must be an integer, got ${block}`)
  if (schedule.kind === 'constant' || schedule.kind === 'linear') {
    const { t, blocks } = schedule
    if (!Number.isInteger(t) || t < 1 || !Number.isInteger(blocks) || blocks < 2) {
      throw new ScheduleError(`need t >= 1 and blocks >= 2, got t=${t}, blocks=${blocks}`)
    }
    if (block < 0 || block > blocks - 1) {
      throw new ScheduleError(`block ${block} outside [0, ${blocks - 1}]`)
    }
    if (schedule.kind === 'constant') return t
    return Math.floor((2 * t * (blocks - 1 - block)) / (blocks - 1))
  }
  const { blocks, keepRate } = schedule
  if (!(keepRate > 0 && keepRate <= 1)) {
    throw new ScheduleError(`keepRate must be in (0, 1], got ${keepRate}`)
  }
  if (block < 0) throw new ScheduleError(`block ${block} must be >= 0`)
  if (!blocks.includes(block)) return 0
  if (nCurrent === undefined) {
    throw new ScheduleError('stage schedules need the current token count')
  }
  return nCurrent - roundHalfUp(keepRate * nCurrent)
}
