// Binary PNM encoding for captured frames (P5 gray, P6 RGB, maxval 255),
// plus downscaling of raw RGBA canvas data to the transmission cap.

export interface RawImage {
  width: number;
  height: number;
  channels: 1 | 3;
  pixels: Uint8Array; // row-major, length = width * height * channels
}

export const MAX_FRAME_WIDTH = 320;
export const MAX_FRAME_HEIGHT = 240;

function header(magic: string, width: number, height: number): Uint8Array {
  return new TextEncoder().encode(`${magic}\n${width} ${height}\n255\n`);
}

export function encodePnm(image: RawImage): Uint8Array {
  const expected = image.width * image.height * image.channels;
  if (image.pixels.length !== expected) {
    throw new Error(`pixel buffer length ${image.pixels.length}, expected ${expected}`);
  }
  const head = header(image.channels === 1 ? "P5" : "P6", image.width, image.height);
  const out = new Uint8Array(head.length + image.pixels.length);
  out.set(head, 0);
  out.set(image.pixels, head.length);
  return out;
}

/** RGBA canvas pixels to a 3-channel RawImage (alpha dropped). */
export function rgbaToRgb(width: number, height: number, rgba: Uint8Array | Uint8ClampedArray): RawImage {
  const pixels = new Uint8Array(width * height * 3);
  for (let i = 0, j = 0; i < rgba.length; i += 4, j += 3) {
    pixels[j] = rgba[i];
    pixels[j + 1] = rgba[i + 1];
    pixels[j + 2] = rgba[i + 2];
  }
  return { width, height, channels: 3, pixels };
}

/** Integer box-filter downscale so the frame fits the transmission cap. */
export function downscaleToCap(image: RawImage): RawImage {
  const factor = Math.max(
    1,
    Math.ceil(image.width / MAX_FRAME_WIDTH),
    Math.ceil(image.height / MAX_FRAME_HEIGHT),
  );
  if (factor === 1) return image;
  const w = Math.max(1, Math.floor(image.width / factor));
  const h = Math.max(1, Math.floor(image.height / factor));
  const c = image.channels;
  const out = new Uint8Array(w * h * c);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      const y1 = Math.min((y + 1) * factor, image.height);
      const x1 = Math.min((x + 1) * factor, image.width);
      for (let ch = 0; ch < c; ch++) {
        let sum = 0;
        let count = 0;
        for (let sy = y * factor; sy < y1; sy++) {
          for (let sx = x * factor; sx < x1; sx++) {
            sum += image.pixels[(sy * image.width + sx) * c + ch];
            count++;
          }
        }
        out[(y * w + x) * c + ch] = Math.round(sum / count);
      }
    }
  }
  return { width: w, height: h, channels: c, pixels: out };
}
