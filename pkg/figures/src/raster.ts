import { PNG } from 'pngjs'
import font from 'oled-font-5x7'

export type RGB = [number, number, number]

export const BLACK: RGB = [0, 0, 0]
export const WHITE: RGB = [255, 255, 255]
export const GRAY: RGB = [150, 150, 150]
export const LIGHT: RGB = [220, 220, 220]
export const BLUE: RGB = [31, 119, 180]
export const ORANGE: RGB = [255, 127, 14]
export const GREEN: RGB = [44, 160, 44]
export const RED: RGB = [214, 39, 40]

const GLYPH_W = font.width as number
const GLYPH_H = font.height as number
const LOOKUP = font.lookup as string[]
const DATA = font.fontData as number[]

/** Fixed-palette RGB raster with integer drawing ops only, so that a given
 * draw sequence produces identical bytes on every platform. */
export class Raster {
  readonly width: number
  readonly height: number
  private pix: Uint8Array

  constructor(width: number, height: number, background: RGB = WHITE) {
    this.width = width
    this.height = height
    this.pix = new Uint8Array(width * height * 3)
    this.fillRect(0, 0, width, height, background)
  }

  set(x: number, y: number, c: RGB): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return
    const i = (y * this.width + x) * 3
    this.pix[i] = c[0]
    this.pix[i + 1] = c[1]
    this.pix[i + 2] = c[2]
  }

  fillRect(x: number, y: number, w: number, h: number, c: RGB): void {
    for (let yy = y; yy < y + h; yy++)
      for (let xx = x; xx < x + w; xx++) this.set(xx, yy, c)
  }

  /** Bresenham; endpoints included. thick widens perpendicular-ish by squares. */
  line(x0: number, y0: number, x1: number, y1: number, c: RGB, thick = 1): void {
    let [x, y] = [Math.round(x0), Math.round(y0)]
    const xe = Math.round(x1)
    const ye = Math.round(y1)
    const dx = Math.abs(xe - x)
    const dy = -Math.abs(ye - y)
    const sx = x < xe ? 1 : -1
    const sy = y < ye ? 1 : -1
    let err = dx + dy
    for (;;) {
      if (thick <= 1) this.set(x, y, c)
      else {
        const r = thick >> 1
        this.fillRect(x - r, y - r, thick, thick, c)
      }
      if (x === xe && y === ye) break
      const e2 = 2 * err
      if (e2 >= dy) {
        err += dy
        x += sx
      }
      if (e2 <= dx) {
        err += dx
        y += sy
      }
    }
  }

  polyline(xs: number[], ys: number[], c: RGB, thick = 1): void {
    for (let i = 1; i < xs.length; i++) this.line(xs[i - 1], ys[i - 1], xs[i], ys[i], c, thick)
  }

  /** Filled square marker centered on the point. */
  marker(x: number, y: number, c: RGB, size = 5): void {
    const r = size >> 1
    this.fillRect(Math.round(x) - r, Math.round(y) - r, size, size, c)
  }

  /** 5x7 bitmap text, integer scale, top-left anchored. Unknown characters
   * render as a hollow box rather than throwing mid-figure. */
  text(x: number, y: number, s: string, c: RGB, scale = 1): void {
    let cx = Math.round(x)
    const cy = Math.round(y)
    for (const ch of s) {
      const idx = LOOKUP.indexOf(ch)
      if (idx < 0) {
        for (let i = 0; i < GLYPH_W; i++)
          for (let j = 0; j < GLYPH_H; j++)
            if (i === 0 || j === 0 || i === GLYPH_W - 1 || j === GLYPH_H - 1)
              this.fillRect(cx + i * scale, cy + j * scale, scale, scale, c)
      } else {
        for (let col = 0; col < GLYPH_W; col++) {
          const bits = DATA[idx * GLYPH_W + col]
          for (let row = 0; row < GLYPH_H; row++)
            if ((bits >> row) & 1)
              this.fillRect(cx + col * scale, cy + row * scale, scale, scale, c)
        }
      }
      cx += (GLYPH_W + 1) * scale
    }
  }

  textWidth(s: string, scale = 1): number {
    return s.length === 0 ? 0 : (s.length * (GLYPH_W + 1) - 1) * scale
  }

  textHeight(scale = 1): number {
    return GLYPH_H * scale
  }

  /** Deterministic PNG bytes: fixed filter and deflate settings, no ancillary
   * chunks, so equal rasters encode to equal files. */
  png(): Buffer {
    const img = new PNG({ width: this.width, height: this.height })
    for (let i = 0, j = 0; i < this.pix.length; i += 3, j += 4) {
      img.data[j] = this.pix[i]
      img.data[j + 1] = this.pix[i + 1]
      img.data[j + 2] = this.pix[i + 2]
      img.data[j + 3] = 255
    }
    return PNG.sync.write(img, { deflateLevel: 9, deflateStrategy: 0, filterType: 0 })
  }
}
