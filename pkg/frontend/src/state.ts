// View state and its pure transitions. Rendering consumes this plus the
// fetched data; nothing here touches the network.

import type { AnnotationKind, Scope } from "./api.js";

export interface ColoringRule {
  key: string;
  value: string;
  color: string;
}

export interface ViewState {
  currentWork: string;
  visibleColumns: AnnotationKind[];
  coloringRules: ColoringRule[];
  selectedAnchor: string | null;
  highlightedAnnotation: string | null;
  scope: Scope;
}

export function defaultState(work: string): ViewState {
  return {
    currentWork: work,
    visibleColumns: ["feature"],
    coloringRules: [],
    selectedAnchor: null,
    highlightedAnnotation: null,
    scope: "ancestors",
  };
}

export function isCssColor(value: string): boolean {
  if (value.trim() === "") return false;
  const probe = document.createElement("span");
  probe.style.color = value;
  return probe.style.color !== "";
}

/** Replace the coloring rules, dropping entries with invalid colors. */
export function withRules(state: ViewState, rules: ColoringRule[]): ViewState {
  return { ...state, coloringRules: rules.filter((r) => isCssColor(r.color)) };
}

export function toggleColumn(state: ViewState, kind: AnnotationKind): ViewState {
  const visible = state.visibleColumns.includes(kind)
    ? state.visibleColumns.filter((k) => k !== kind)
    : [...state.visibleColumns, kind];
  return { ...state, visibleColumns: visible };
}

export function selectAnchor(state: ViewState, anchor: string | null): ViewState {
  // a new passage selection clears any annotation highlight
  return { ...state, selectedAnchor: anchor, highlightedAnnotation: null };
}

export function highlightAnnotation(
  state: ViewState,
  id: string | null,
): ViewState {
  return { ...state, highlightedAnnotation: id };
}

export function withScope(state: ViewState, scope: Scope): ViewState {
  return { ...state, scope };
}
