/* tslint:disable */
/* eslint-disable */

/**
 * CM points of the (3,−1) maximal order up to `height` in a window.
 */
export function cm_points(height: number, re_min: number, re_max: number, im_min: number, im_max: number): string;

/**
 * Splitting report for the elliptic curve in the CM fiber fixed by
 * `μ = k + l·x + m·y + n·xy` (exact rationals such as `1/2`).
 */
export function curve_report(k: string, l: string, m: string, n: string): string;

/**
 * Splitting report for the fiber over `τ`.
 */
export function fiber_report(re: number, im: number): string;

/**
 * Images `γτ` of a point under the norm-one units of height ≤ `height`.
 */
export function unit_orbit(re: number, im: number, height: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cm_points: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly curve_report: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly fiber_report: (a: number, b: number) => [number, number];
    readonly unit_orbit: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
