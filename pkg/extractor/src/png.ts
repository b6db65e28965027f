/** Minimal strict PNG decoder: 8-bit gray/RGB/RGBA, non-interlaced. */
import * as zlib from "node:zlib";

import { ExtractionError } from "./types.js";

export class ImageError extends ExtractionError {}

export interface DecodedImage {
  width: number;
  height: number;
  channels: number;
  /** Unfiltered samples, row-major, `width * height * channels` bytes. */
  pixels: Uint8Array;
}

const SIGNATURE = Uint8Array.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

const CHANNELS: Record<number, number> = { 0: 1, 2: 3, 6: 4 };

function readU32(bytes: Uint8Array, offset: number): number {
  return (
    ((bytes[offset]! << 24) | (bytes[offset + 1]! << 16) | (bytes[offset + 2]! << 8) | bytes[offset + 3]!) >>> 0
  );
}

function paeth(left: number, up: number, upLeft: number): number {
  const p = left + up - upLeft;
  const pa = Math.abs(p - left);
  const pb = Math.abs(p - up);
  const pc = Math.abs(p - upLeft);
  if (pa <= pb && pa <= pc) return left;
  if (pb <= pc) return up;
  return upLeft;
}

export function decodePng(bytes: Uint8Array): DecodedImage {
  if (bytes.length < SIGNATURE.length + 12) {
    throw new ImageError("truncated PNG");
  }
  for (let i = 0; i < SIGNATURE.length; i++) {
    if (bytes[i] !== SIGNATURE[i]) {
      throw new ImageError("bad PNG signature");
    }
  }

  let offset = SIGNATURE.length;
  let header: { width: number; height: number; channels: number } | null = null;
  const idat: Buffer[] = [];
  let ended = false;

  while (offset + 12 <= bytes.length && !ended) {
    const length = readU32(bytes, offset);
    const type = Buffer.from(bytes.subarray(offset + 4, offset + 8)).toString("latin1");
    const dataStart = offset + 8;
    const dataEnd = dataStart + length;
    if (dataEnd + 4 > bytes.length) {
      throw new ImageError(`truncated ${type} chunk`);
    }
    const data = bytes.subarray(dataStart, dataEnd);
    const stored = readU32(bytes, dataEnd);
    const actual = zlib.crc32(bytes.subarray(offset + 4, dataEnd)) >>> 0;
    if (stored !== actual) {
      throw new ImageError(`CRC mismatch in ${type} chunk`);
    }

    if (type === "IHDR") {
      const bitDepth = data[8]!;
      const colorType = data[9]!;
      const interlace = data[12]!;
      const channels = CHANNELS[colorType];
      if (bitDepth !== 8 || channels === undefined || interlace !== 0) {
        throw new ImageError(
          `unsupported PNG variant (depth ${bitDepth}, color type ${colorType}, interlace ${interlace})`,
        );
      }
      header = { width: readU32(data, 0), height: readU32(data, 4), channels };
      if (header.width === 0 || header.height === 0) {
        throw new ImageError("zero-sized image");
      }
    } else if (type === "IDAT") {
      idat.push(Buffer.from(data));
    } else if (type === "IEND") {
      ended = true;
    }
    offset = dataEnd + 4;
  }

  if (!header) throw new ImageError("missing IHDR chunk");
  if (!ended) throw new ImageError("missing IEND chunk");
  if (idat.length === 0) throw new ImageError("missing IDAT chunk");

  let raw: Buffer;
  try {
    raw = zlib.inflateSync(Buffer.concat(idat));
  } catch (exc) {
    throw new ImageError(`corrupt image data: ${exc}`);
  }

  const { width, height, channels } = header;
  const stride = width * channels;
  if (raw.length !== height * (stride + 1)) {
    throw new ImageError(`unexpected pixel payload size ${raw.length}`);
  }

  const pixels = new Uint8Array(height * stride);
  const prior = new Uint8Array(stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)]!;
    const row = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    const out = pixels.subarray(y * stride, (y + 1) * stride);
    for (let i = 0; i < stride; i++) {
      const left = i >= channels ? out[i - channels]! : 0;
      const up = prior[i]!;
      const upLeft = i >= channels ? prior[i - channels]! : 0;
      let value = row[i]!;
      switch (filter) {
        case 0:
          break;
        case 1:
          value += left;
          break;
        case 2:
          value += up;
          break;
        case 3:
          value += (left + up) >> 1;
          break;
        case 4:
          value += paeth(left, up, upLeft);
          break;
        default:
          throw new ImageError(`unknown row filter ${filter}`);
      }
      out[i] = value & 0xff;
    }
    prior.set(out);
  }
  return { width, height, channels, pixels };
}
