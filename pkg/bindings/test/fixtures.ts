/** Deterministic fixture generation and an independent CLI harness used by
 * the parity tests. The tensor writer here is intentionally separate from
 * the binding's encoder so serialization is cross-checked, not assumed. */

import { spawnSync } from 'node:child_process'
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a |= 0
    a = (a + 0x6d2b79f5) | 0
    let t = Math.imul(a ^ (a >>> 15), 1 | a)
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

export function randomTokens(seed: number, rows: number, cols: number): Float32Array {
  const rand = mulberry32(seed)
  const out = new Float32Array(rows * cols)
  for (let i = 0; i < out.length; i++) out[i] = Math.fround(rand() * 2 - 1)
  return out
}

/** Test-local tensor writer: fixed header string + DataView float writes. */
export function writeTensorFileIndependently(
  path: string,
  data: Float32Array,
  shape: [number, number, number],
): void {
  const header = Buffer.from(
    `{"dtype":"f32","shape":[${shape[0]},${shape[1]},${shape[2]}],"layout":"row-major","endian":"little"}\n`,
    'ascii',
  )
  const payload = new ArrayBuffer(data.length * 4)
  const dv = new DataView(payload)
  for (let i = 0; i < data.length; i++) dv.setFloat32(i * 4, data[i], true)
  writeFileSync(path, Buffer.concat([header, Buffer.from(payload)]))
}

export function runCoreCliDirectly(args: string[]): void {
  const python = process.env.TOKCLUST_PYTHON ?? 'python3'
  const proc = spawnSync(python, ['-m', 'tokclust', ...args], { encoding: 'utf8' })
  if (proc.status !== 0) {
    throw new Error(`core CLI failed (${proc.status}): ${proc.stderr}`)
  }
}

export function inScratchDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), 'tokclust-parity-'))
  try {
    return fn(dir)
  } finally {
    rmSync(dir, { recursive: true, force: true })
  }
}

export function readJson<T>(path: string): T {
  return JSON.parse(readFileSync(path, 'utf8')) as T
}
