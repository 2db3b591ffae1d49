/**
 * Decoding for the server's array and number marshaling.
 *
 * Arrays arrive as `{dtype, shape, data}` where `data` is base64 of the
 * row-major bytes; float64 payloads become `Float64Array` views over one
 * decoded copy, int64 payloads become plain `number[]` (indices and edge
 * endpoints are always far below 2^53).  Non-finite floats arrive as the
 * strings `"inf"`, `"-inf"`, `"nan"`.
 */

export interface ArrayPayload {
  dtype: string;
  shape: number[];
  data: string;
}

/** Dense row-major matrix; `values[r * cols + c]` addresses row r, col c. */
export interface Matrix {
  rows: number;
  cols: number;
  values: Float64Array;
}

function bytesOf(payload: ArrayPayload): ArrayBuffer {
  const buf = Buffer.from(payload.data, "base64");
  return buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength);
}

export function decodeFloatVector(payload: ArrayPayload): Float64Array {
  if (payload.dtype !== "float64") {
    throw new TypeError(`expected float64 payload, got ${payload.dtype}`);
  }
  return new Float64Array(bytesOf(payload));
}

export function decodeIntVector(payload: ArrayPayload): number[] {
  if (payload.dtype !== "int64") {
    throw new TypeError(`expected int64 payload, got ${payload.dtype}`);
  }
  return Array.from(new BigInt64Array(bytesOf(payload)), Number);
}

export function decodeMatrix(payload: ArrayPayload): Matrix {
  const [rows, cols] = payload.shape;
  if (payload.shape.length !== 2 || rows === undefined || cols === undefined) {
    throw new TypeError(`expected a 2-d payload, got shape ${payload.shape}`);
  }
  const values = decodeFloatVector(payload);
  if (values.length !== rows * cols) {
    throw new TypeError(
      `payload length ${values.length} does not match ${rows}x${cols}`,
    );
  }
  return { rows, cols, values };
}

/** Row `r` of a matrix as a (copying) slice — handy in tests and glue code. */
export function matrixRow(matrix: Matrix, r: number): Float64Array {
  return matrix.values.slice(r * matrix.cols, (r + 1) * matrix.cols);
}

export function decodeNumber(value: number | string): number {
  if (typeof value === "number") return value;
  if (value === "inf") return Infinity;
  if (value === "-inf") return -Infinity;
  if (value === "nan") return NaN;
  throw new TypeError(`not a number encoding: ${JSON.stringify(value)}`);
}
