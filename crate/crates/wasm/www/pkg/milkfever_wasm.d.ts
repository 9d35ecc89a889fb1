/* tslint:disable */
/* eslint-disable */

export function default_params(): string;

/**
 * Loss breakdown per group plus both totals, for a parameter document.
 */
export function losses(params: string, unit: string): string;

/**
 * Minimum detectable effect at `points` sample sizes spread over `[n_min, n_max]`.
 */
export function mde_curve(t_alpha: number, t_power: number, treat_prop: number, variance: number, n_min: number, n_max: number, points: number): string;

/**
 * Gain at full adoption and the adoption curve for one market, in crores.
 */
export function surplus_curve(supply_elasticity: number, demand_elasticity: number, price: number, base_quantity_tonnes: number, milk_loss_tonnes: number, success_rate: number, steps: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly default_params: () => [number, number];
    readonly losses: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly mde_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly surplus_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
