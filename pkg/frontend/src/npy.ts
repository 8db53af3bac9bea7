/**
 * Minimal .npy v1.0 reader/writer for 2D float64 arrays.
 *
 * This is the wire format the betti-match CLI consumes for images and emits
 * for gradients, so the client can marshal arrays without any binding code.
 */

export interface Matrix {
  rows: number;
  cols: number;
  /** row-major values, length rows*cols */
  data: Float64Array;
}

const MAGIC = Buffer.from("\x93NUMPY", "latin1");

export function writeNpy(matrix: Matrix): Buffer {
  const { rows, cols, data } = matrix;
  if (data.length !== rows * cols) {
    throw new Error(`data length ${data.length} != ${rows}x${cols}`);
  }
  let header = `{'descr': '<f8', 'fortran_order': False, 'shape': (${rows}, ${cols}), }`;
  // pad so magic+version+len+header is a multiple of 64, newline-terminated
  const unpadded = MAGIC.length + 2 + 2 + header.length + 1;
  header += " ".repeat((64 - (unpadded % 64)) % 64) + "\n";

  const head = Buffer.alloc(MAGIC.length + 2 + 2 + header.length);
  MAGIC.copy(head, 0);
  head[6] = 1; // version 1.0
  head[7] = 0;
  head.writeUInt16LE(header.length, 8);
  head.write(header, 10, "latin1");

  const body = Buffer.alloc(data.length * 8);
  for (let i = 0; i < data.length; i++) {
    body.writeDoubleLE(data[i], i * 8);
  }
  return Buffer.concat([head, body]);
}

export function readNpy(buf: Buffer): Matrix {
  if (!buf.subarray(0, 6).equals(MAGIC)) {
    throw new Error("not an npy file");
  }
  const major = buf[6];
  const headerLen = major === 1 ? buf.readUInt16LE(8) : buf.readUInt32LE(8);
  const headerStart = major === 1 ? 10 : 12;
  const header = buf.subarray(headerStart, headerStart + headerLen).toString("latin1");

  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  if (descr !== "<f8") {
    throw new Error(`unsupported npy dtype ${descr}; expected <f8`);
  }
  if (!/'fortran_order':\s*False/.test(header)) {
    throw new Error("fortran-ordered npy arrays are not supported");
  }
  const shape = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  const dims = (shape ?? "")
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map(Number);
  if (dims.length !== 2 || dims.some((d) => !Number.isInteger(d) || d < 0)) {
    throw new Error(`expected a 2D npy array, got shape (${shape})`);
  }
  const [rows, cols] = dims;
  const start = headerStart + headerLen;
  const n = rows * cols;
  if (buf.length < start + n * 8) {
    throw new Error("npy payload shorter than header promises");
  }
  const data = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    data[i] = buf.readDoubleLE(start + i * 8);
  }
  return { rows, cols, data };
}

export function toMatrix(values: ReadonlyArray<ReadonlyArray<number>>): Matrix {
  const rows = values.length;
  if (rows === 0) {
    throw new Error("image has zero pixels");
  }
  const cols = values[0].length;
  if (cols === 0) {
    throw new Error("image has zero pixels");
  }
  const data = new Float64Array(rows * cols);
  for (let r = 0; r < rows; r++) {
    if (values[r].length !== cols) {
      throw new Error(`ragged image: row ${r} has ${values[r].length} values, expected ${cols}`);
    }
    for (let c = 0; c < cols; c++) {
      const v = values[r][c];
      if (!Number.isFinite(v)) {
        throw new Error("image contains NaN or infinite pixel values");
      }
      data[r * cols + c] = v;
    }
  }
  return { rows, cols, data };
}

export function toNested(matrix: Matrix): number[][] {
  const out: number[][] = [];
  for (let r = 0; r < matrix.rows; r++) {
    out.push(Array.from(matrix.data.subarray(r * matrix.cols, (r + 1) * matrix.cols)));
  }
  return out;
}
