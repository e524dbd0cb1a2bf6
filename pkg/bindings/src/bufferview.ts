/**
 * Pointer-free views into caller-provided contiguous float buffers.
 *
 * A view addresses a row-major (tokens, dim) matrix living at an element
 * offset inside a Float32Array. Only contiguous row-major layouts are
 * accepted; adapters for framework tensor types belong in user code.
 */

export interface BufferView {
  /** Backing storage; never mutated by this package. */
  buffer: Float32Array
  /** [tokens, dim], row-major. */
  shape: readonly [number, number]
  /** Base offset inside `buffer`, in elements. Defaults to 0. */
  offset?: number
  /** Strides in elements; if given, must describe the contiguous row-major
   * layout [dim, 1]. */
  strides?: readonly [number, number]
}

export class ViewError extends Error {}

/** Validate a view and return the zero-copy window it describes. */
export function viewData(view: BufferView): Float32Array {
  const [rows, cols] = view.shape
  if (!Number.isInteger(rows) || !Number.isInteger(cols) || rows < 1 || cols < 1) {
    throw new ViewError(`shape must be two positive integers, got [${view.shape}]`)
  }
  const offset = view.offset ?? 0
  if (!Number.isInteger(offset) || offset < 0) {
    throw new ViewError(`offset must be a non-negative integer, got ${offset}`)
  }
  if (view.strides !== undefined) {
    const [rs, cs] = view.strides
    if (rs !== cols || cs !== 1) {
      throw new ViewError(
        `only contiguous row-major strides [${cols}, 1] are supported, got [${view.strides}]`,
      )
    }
  }
  const needed = rows * cols
  if (offset + needed > view.buffer.length) {
    throw new ViewError(
      `view needs ${needed} elements at offset ${offset}, buffer holds ${view.buffer.length}`,
    )
  }
  return view.buffer.subarray(offset, offset + needed)
}
