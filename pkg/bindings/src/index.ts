/**
 * Flat-buffer bindings for the tokclust token clustering toolkit.
 *
 * Four entry points: `cluster` groups a token matrix into k clusters,
 * `reduce` merges tokens down to a budget (size-weighted averages),
 * `unmerge` back-projects reduced tokens to their original positions, and
 * `scheduleRemovals` evaluates removal schedules. Inputs and outputs are
 * plain Float32Arrays plus shapes; `cluster` and `reduce` round-trip
 * through the core's command-line interface and file formats, staging one
 * copy of the data on disk per call.
 */

import { readFileSync, writeFileSync } from 'node:fs'
import { join } from 'node:path'

import { BufferView, ViewError, viewData } from './bufferview.js'
import { decodeTensor, encodeTensor } from './tensorfile.js'
import { runCli, withScratchDir } from './runner.js'

export type { BufferView } from './bufferview.js'
export { viewData, ViewError } from './bufferview.js'
export { encodeTensor, decodeTensor, TensorFormatError } from './tensorfile.js'
export {
  CliParameterError,
  CliFileError,
  CliInternalError,
  pythonExecutable,
} from './runner.js'
export { scheduleRemovals, ScheduleError } from './schedules.js'
export type { Schedule } from './schedules.js'

export type Linkage = 'single' | 'complete' | 'average'
export type Engine = 'naive' | 'nnchain' | 'mst'

export interface ClusterOptions {
  /** Clustering engine; defaults to the nearest-neighbour chain. */
  engine?: Engine
}

export interface ReduceOptions {
  /** Per-token patch counts; defaults to all ones. */
  sizes?: readonly number[]
  /** Leading tokens excluded from clustering (e.g. a class token). */
  protectedPrefix?: number
}

export interface ReduceResult {
  /** Merged token matrix, row-major. */
  features: Float32Array
  shape: [number, number]
  /** Patch count carried by each output token. */
  sizes: number[]
  /** Cluster index for each input token below the protected prefix. */
  labels: number[]
}

/** Cluster the rows of a token matrix into k groups. */
export function cluster(
  view: BufferView,
  linkage: Linkage,
  k: number,
  options: ClusterOptions = {},
): number[] {
  const data = viewData(view)
  const [rows, cols] = view.shape
  if (!Number.isInteger(k) || k < 1 || k > rows) {
    throw new ViewError(`k must be in [1, ${rows}], got ${k}`)
  }
  return withScratchDir((dir) => {
    const input = join(dir, 'in.tensor')
    const output = join(dir, 'out.json')
    writeFileSync(input, encodeTensor(data, [1, rows, cols]))
    runCli([
      'cluster',
      '--input', input,
      '--output', output,
      '--linkage', linkage,
      '--engine', options.engine ?? 'nnchain',
      '--k', String(k),
    ])
    const payload = JSON.parse(readFileSync(output, 'utf8')) as { labels: number[][] }
    return payload.labels[0]
  })
}

/** Merge a token matrix down to `keep` tokens by size-weighted averaging. */
export function reduce(
  view: BufferView,
  linkage: Linkage,
  keep: number,
  options: ReduceOptions = {},
): ReduceResult {
  const data = viewData(view)
  const [rows, cols] = view.shape
  const protectedPrefix = options.protectedPrefix ?? 0
  if (options.sizes !== undefined && options.sizes.length !== rows) {
    throw new ViewError(`sizes must have one entry per token (${rows})`)
  }
  return withScratchDir((dir) => {
    const input = join(dir, 'in.tensor')
    const prefix = join(dir, 'out')
    writeFileSync(input, encodeTensor(data, [1, rows, cols]))
    const args = [
      'reduce',
      '--input', input,
      '--output', prefix,
      '--linkage', linkage,
      '--keep', String(keep),
      '--protected', String(protectedPrefix),
    ]
    if (options.sizes !== undefined) {
      const sizesPath = join(dir, 'sizes.json')
      writeFileSync(sizesPath, JSON.stringify([options.sizes]))
      args.push('--sizes', sizesPath)
    }
    runCli(args)
    const tensor = decodeTensor(readFileSync(`${prefix}.tensor`))
    const meta = JSON.parse(readFileSync(`${prefix}.json`, 'utf8')) as {
      labels: number[][]
      sizes: number[][]
    }
    return {
      features: tensor.data,
      shape: [tensor.shape[1], tensor.shape[2]],
      sizes: meta.sizes[0],
      labels: meta.labels[0],
    }
  })
}

/**
 * Back-project reduced tokens to their pre-merge positions: output row p is
 * the reduced row `labels[p]`. Pure index gathering; no process round-trip.
 */
export function unmerge(
  reduced: BufferView,
  labels: readonly number[],
): { features: Float32Array; shape: [number, number] } {
  const data = viewData(reduced)
  const [rows, cols] = reduced.shape
  const out = new Float32Array(labels.length * cols)
  for (let p = 0; p < labels.length; p++) {
    const c = labels[p]
    if (!Number.isInteger(c) || c < 0 || c >= rows) {
      throw new ViewError(`label ${c} at position ${p} outside [0, ${rows})`)
    }
    out.set(data.subarray(c * cols, (c + 1) * cols), p * cols)
  }
  return { features: out, shape: [labels.length, cols] }
}
