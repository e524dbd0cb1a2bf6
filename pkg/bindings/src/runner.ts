/**
 * Process boundary to the core toolkit's command-line interface.
 *
 * Every binding call stages its inputs as temporary files, runs one CLI
 * process, and parses the outputs back; the core is reentrant, so callers
 * may issue concurrent invocations freely.
 */

import { spawnSync } from 'node:child_process'
import { mkdtempSync, rmSync } from 'node:fs'
import { tmpdir } from 'node:os'
import { join } from 'node:path'

export class CliParameterError extends Error {}
export class CliFileError extends Error {}
export class CliInternalError extends Error {}

/** Interpreter used to launch the core; override with TOKCLUST_PYTHON. */
export function pythonExecutable(): string {
  return process.env.TOKCLUST_PYTHON ?? 'python3'
}

export function runCli(args: string[]): void {
  const proc = spawnSync(pythonExecutable(), ['-m', 'tokclust', ...args], {
    encoding: 'utf8',
  })
  if (proc.error) {
    throw new CliInternalError(`failed to launch core CLI: ${proc.error.message}`)
  }
  if (proc.status === 0) return
  const detail = (proc.stderr ?? '').trim() || `exit code ${proc.status}`
  if (proc.status === 3) throw new CliParameterError(detail)
  if (proc.status === 2) throw new CliFileError(detail)
  throw new CliInternalError(detail)
}

/** Run `fn` with a private scratch directory, removed afterwards. */
export function withScratchDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), 'tokclust-'))
  try {
    return fn(dir)
  } finally {
    rmSync(dir, { recursive: true, force: true })
  }
}
