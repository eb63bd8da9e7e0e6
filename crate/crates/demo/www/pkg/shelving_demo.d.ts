/* tslint:disable */
/* eslint-disable */

/**
 * Drive and resonance settings chosen on the page. Everything else keeps
 * the library defaults.
 */
export class DemoParams {
    free(): void;
    [Symbol.dispose](): void;
    constructor(rabi_frequency: number, strong_decay: number, weak_decay: number, a_re: number, a_im: number, b_re: number, b_im: number);
}

/**
 * One trajectory: emission times by channel and the dark periods found
 * in it.
 */
export class Raster {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Dark periods as `[start, end]` pairs.
     */
    dark_periods(): Float64Array;
    fluorescent(): Float64Array;
    reset_gamma(): Float64Array;
    reset_gamma_prime(): Float64Array;
}

/**
 * Kaplan-Meier survival of pooled dark durations next to the oracle,
 * both conditioned on exceeding the dark threshold.
 */
export class SurvivalCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    durations(): Float64Array;
    empirical(): Float64Array;
    oracle(): Float64Array;
    /**
     * Completed dark periods behind the estimate.
     */
    periods: number;
}

/**
 * Populations `|a0|², |a1|², |a2|²` and the norm on an even grid, packed
 * as `[t, p0, p1, p2, norm]` per point.
 */
export function amplitude_curves(params: DemoParams, t_max: number, points: number): Float64Array;

export function dark_survival(params: DemoParams, seed: bigint, count: bigint, t_end: number): SurvivalCurve;

export function emission_raster(params: DemoParams, seed: bigint, index: bigint, t_end: number): Raster;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demoparams_free: (a: number, b: number) => void;
    readonly __wbg_get_survivalcurve_periods: (a: number) => number;
    readonly __wbg_raster_free: (a: number, b: number) => void;
    readonly __wbg_set_survivalcurve_periods: (a: number, b: number) => void;
    readonly __wbg_survivalcurve_free: (a: number, b: number) => void;
    readonly amplitude_curves: (a: number, b: number, c: number) => [number, number, number, number];
    readonly dark_survival: (a: number, b: bigint, c: bigint, d: number) => [number, number, number];
    readonly demoparams_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly emission_raster: (a: number, b: bigint, c: bigint, d: number) => [number, number, number];
    readonly raster_dark_periods: (a: number) => [number, number];
    readonly raster_fluorescent: (a: number) => [number, number];
    readonly raster_reset_gamma: (a: number) => [number, number];
    readonly raster_reset_gamma_prime: (a: number) => [number, number];
    readonly survivalcurve_durations: (a: number) => [number, number];
    readonly survivalcurve_empirical: (a: number) => [number, number];
    readonly survivalcurve_oracle: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
