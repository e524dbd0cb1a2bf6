/**
 * The core toolkit's binary tensor file format: one ASCII JSON header line
 * ({"dtype":"f32","shape":[B,N,D],"layout":"row-major","endian":"little"}),
 * a newline, then 4*B*N*D little-endian float bytes.
 */

import { endianness } from 'node:os'

export class TensorFormatError extends Error {}

const LITTLE_ENDIAN_HOST = endianness() === 'LE'

export function encodeTensor(
  data: Float32Array,
  shape: readonly [number, number, number],
): Buffer {
  const [b, n, d] = shape
  if (data.length !== b * n * d) {
    throw new TensorFormatError(`shape [${shape}] needs ${b * n * d} elements, got ${data.length}`)
  }
  const header = Buffer.from(
    `{"dtype":"f32","shape":[${b},${n},${d}],"layout":"row-major","endian":"little"}\n`,
    'ascii',
  )
  let payload: Buffer
  if (LITTLE_ENDIAN_HOST) {
    payload = Buffer.from(data.buffer, data.byteOffset, data.byteLength)
  } else {
    payload = Buffer.allocUnsafe(data.length * 4)
    for (let i = 0; i < data.length; i++) payload.writeFloatLE(data[i], i * 4)
  }
  return Buffer.concat([header, payload])
}

export function decodeTensor(blob: Buffer): {
  data: Float32Array
  shape: [number, number, number]
} {
  const newline = blob.indexOf(0x0a)
  if (newline < 0) throw new TensorFormatError('missing header line')
  let header: unknown
  try {
    header = JSON.parse(blob.subarray(0, newline).toString('ascii'))
  } catch (e) {
    throw new TensorFormatError(`bad tensor header: ${e}`)
  }
  const h = header as { dtype?: string; shape?: number[]; layout?: string; endian?: string }
  if (h.dtype !== 'f32') throw new TensorFormatError(`unsupported dtype ${h.dtype}`)
  if (h.layout !== 'row-major') throw new TensorFormatError(`unsupported layout ${h.layout}`)
  if (h.endian !== 'little') throw new TensorFormatError(`unsupported endianness ${h.endian}`)
  if (!Array.isArray(h.shape) || h.shape.length !== 3 || h.shape.some((s) => !Number.isInteger(s) || s < 1)) {
    throw new TensorFormatError(`bad shape ${JSON.stringify(h.shape)}`)
  }
  const [b, n, d] = h.shape as [number, number, number]
  const payload = blob.subarray(newline + 1)
  if (payload.length !== 4 * b * n * d) {
    throw new TensorFormatError(
      `payload is ${payload.length} bytes, shape [${h.shape}] needs ${4 * b * n * d}`,
    )
  }
  // Copy into a fresh, aligned ArrayBuffer; Buffer views may be unaligned.
  const bytes = new Uint8Array(payload.length)
  bytes.set(payload)
  const data = new Float32Array(bytes.buffer)
  if (!LITTLE_ENDIAN_HOST) {
    const dv = new DataView(bytes.buffer)
    for (let i = 0; i < data.length; i++) data[i] = dv.getFloat32(i * 4, true)
  }
  return { data, shape: [b, n, d] }
}
