// Binary netpbm decoding for the two formats the service emits: P5 (PGM)
// density rasters and P6 (PPM) correlation matrices, 8-bit only.

export interface GrayImage {
  width: number;
  height: number;
  pixels: Uint8Array; // row-major, height * width
}

export interface RgbImage {
  width: number;
  height: number;
  pixels: Uint8Array; // row-major, height * width * 3
}

const WS = new Set([0x20, 0x09, 0x0a, 0x0d, 0x0b, 0x0c]);

interface Header {
  width: number;
  height: number;
  maxval: number;
  offset: number; // first raster byte
}

// Header tokens are separated by whitespace; a '#' starts a comment that
// runs to end of line. Exactly one whitespace byte follows maxval.
function parseHeader(bytes: Uint8Array, magic: string): Header {
  if (bytes.length < 2 || String.fromCharCode(bytes[0], bytes[1]) !== magic) {
    throw new Error(`not a ${magic} image`);
  }
  let pos = 2;
  const nextToken = (): number => {
    for (;;) {
      while (pos < bytes.length && WS.has(bytes[pos])) pos++;
      if (pos < bytes.length && bytes[pos] === 0x23) {
        while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
        continue;
      }
      break;
    }
    let start = pos;
    while (pos < bytes.length && !WS.has(bytes[pos]) && bytes[pos] !== 0x23) pos++;
    if (start === pos) throw new Error("truncated header");
    const value = Number(new TextDecoder().decode(bytes.subarray(start, pos)));
    if (!Number.isInteger(value) || value < 0) throw new Error("bad header token");
    return value;
  };
  const width = nextToken();
  const height = nextToken();
  const maxval = nextToken();
  if (maxval !== 255) throw new Error(`unsupported maxval ${maxval}`);
  if (pos >= bytes.length || !WS.has(bytes[pos])) throw new Error("truncated header");
  pos++;
  return { width, height, maxval, offset: pos };
}

export function parsePgm(bytes: Uint8Array): GrayImage {
  const h = parseHeader(bytes, "P5");
  const n = h.width * h.height;
  if (bytes.length - h.offset < n) throw new Error("truncated pixel data");
  return {
    width: h.width,
    height: h.height,
    pixels: bytes.slice(h.offset, h.offset + n),
  };
}

export function parsePpm(bytes: Uint8Array): RgbImage {
  const h = parseHeader(bytes, "P6");
  const n = h.width * h.height * 3;
  if (bytes.length - h.offset < n) throw new Error("truncated pixel data");
  return {
    width: h.width,
    height: h.height,
    pixels: bytes.slice(h.offset, h.offset + n),
  };
}
