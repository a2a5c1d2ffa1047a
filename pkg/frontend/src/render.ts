// Pure view construction: (fetched data, state, handlers) -> fresh DOM tree.
// Re-rendering with the same inputs yields the same element list.

import type { Annotation, AnnotationKind, FeatureBody, TreeNode, WorkTree } from "./api.js";
import { bodyText } from "./api.js";
import type { ViewState } from "./state.js";

export interface Handlers {
  onWordClick(anchor: string): void;
  onAnnotationSelect(id: string): void;
  onColumnToggle(kind: AnnotationKind): void;
  onScopeToggle(): void;
}

export interface ViewData {
  tree: WorkTree | null;
  annotations: Annotation[];
  /** Reverse-lookup results for the selected anchor, or null when nothing
      is selected. */
  panel: Annotation[] | null;
}

const COLUMN_ORDER: AnnotationKind[] = ["query", "feature", "keyword", "topic"];

interface LeafGroup {
  head: TreeNode;
  leaves: TreeNode[];
}

/** Leaves in document order, grouped by their enclosing second-finest-type
    object; works with fewer than two levels fall back to the root. */
export function groupLeaves(work: WorkTree): LeafGroup[] {
  const groupType =
    work.types.length < 2 ? work.tree.type : work.types[work.types.length - 2];
  const groups: LeafGroup[] = [];

  const walk = (node: TreeNode, head: TreeNode) => {
    const nextHead = node.type === groupType ? node : head;
    if (node.children === undefined) {
      const current = groups[groups.length - 1];
      if (current !== undefined && current.head === nextHead) {
        current.leaves.push(node);
      } else {
        groups.push({ head: nextHead, leaves: [node] });
      }
      return;
    }
    for (const child of node.children) walk(child, nextHead);
  };

  walk(work.tree, work.tree);
  return groups;
}

/** First-match-wins colors for leaf anchors, from frozen feature extensions. */
export function leafColors(
  annotations: Annotation[],
  state: ViewState,
): Map<string, string> {
  const colors = new Map<string, string>();
  for (const rule of state.coloringRules) {
    for (const ann of annotations) {
      if (ann.kind !== "feature") continue;
      const body = ann.body as FeatureBody;
      if (body.key !== rule.key || body.value !== rule.value) continue;
      for (const target of ann.targets) {
        if (!colors.has(target)) colors.set(target, rule.color);
      }
    }
  }
  return colors;
}

function highlightTargets(data: ViewData, state: ViewState): Set<string> {
  if (state.highlightedAnnotation === null) return new Set();
  const pool = [...(data.panel ?? []), ...data.annotations];
  const ann = pool.find((a) => a.id === state.highlightedAnnotation);
  return new Set(ann?.targets ?? []);
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className !== undefined) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderToolbar(state: ViewState, handlers: Handlers): HTMLElement {
  const bar = el("div", "toolbar");
  for (const kind of COLUMN_ORDER) {
    const button = el("button", "column-toggle", kind);
    button.dataset.kind = kind;
    if (state.visibleColumns.includes(kind)) button.classList.add("on");
    button.onclick = () => handlers.onColumnToggle(kind);
    bar.appendChild(button);
  }
  const scope = el("button", "scope-toggle", `scope: ${state.scope}`);
  scope.onclick = () => handlers.onScopeToggle();
  bar.appendChild(scope);
  return bar;
}

function renderSource(
  data: ViewData,
  state: ViewState,
  handlers: Handlers,
  highlighted: Set<string>,
): HTMLElement {
  const source = el("div", "source");
  if (data.tree === null) {
    source.appendChild(el("p", "empty", "no such work"));
    return source;
  }
  const colors = leafColors(data.annotations, state);
  for (const group of groupLeaves(data.tree)) {
    const section = el("section", "group");
    const head = el("h3", "group-head", `${group.head.type} ${group.head.key}`);
    head.dataset.anchor = group.head.anchor;
    if (highlighted.has(group.head.anchor)) head.classList.add("highlighted");
    section.appendChild(head);
    const body = el("p", "group-body");
    for (const leaf of group.leaves) {
      const word = el("span", "word", leaf.token ?? "");
      word.dataset.anchor = leaf.anchor;
      const color = colors.get(leaf.anchor);
      if (color !== undefined) word.style.color = color;
      if (highlighted.has(leaf.anchor)) word.classList.add("highlighted");
      if (state.selectedAnchor === leaf.anchor) word.classList.add("selected");
      word.onclick = () => handlers.onWordClick(leaf.anchor);
      body.appendChild(word);
      body.appendChild(document.createTextNode(" "));
    }
    section.appendChild(body);
    source.appendChild(section);
  }
  return source;
}

function annotationEntry(
  ann: Annotation,
  state: ViewState,
  handlers: Handlers,
): HTMLElement {
  const entry = el("div", "annotation-entry");
  entry.dataset.id = ann.id;
  if (state.highlightedAnnotation === ann.id) entry.classList.add("active");
  entry.appendChild(el("span", "entry-kind", ann.kind));
  entry.appendChild(el("span", "entry-body", bodyText(ann)));
  entry.appendChild(el("span", "entry-count", String(ann.targets.length)));
  entry.onclick = () => handlers.onAnnotationSelect(ann.id);
  return entry;
}

function renderColumns(
  data: ViewData,
  state: ViewState,
  handlers: Handlers,
): HTMLElement[] {
  const columns: HTMLElement[] = [];
  for (const kind of COLUMN_ORDER) {
    if (!state.visibleColumns.includes(kind)) continue;
    const column = el("div", "column");
    column.dataset.kind = kind;
    column.appendChild(el("h2", undefined, kind));
    for (const ann of data.annotations) {
      if (ann.kind === kind) {
        column.appendChild(annotationEntry(ann, state, handlers));
      }
    }
    columns.push(column);
  }
  return columns;
}

function renderPanel(
  data: ViewData,
  state: ViewState,
  handlers: Handlers,
): HTMLElement {
  const panel = el("div", "panel");
  panel.appendChild(el("h2", undefined, "passage"));
  if (state.selectedAnchor === null || data.panel === null) {
    panel.appendChild(el("p", "hint", "click a word to see its annotations"));
    return panel;
  }
  panel.appendChild(el("p", "panel-anchor", state.selectedAnchor));
  if (data.panel.length === 0) {
    panel.appendChild(el("p", "hint", "no annotations target this passage"));
    return panel;
  }
  for (const ann of data.panel) {
    panel.appendChild(annotationEntry(ann, state, handlers));
  }
  const active = data.panel.find((a) => a.id === state.highlightedAnnotation);
  if (active !== undefined) {
    const detail = el("div", "detail");
    detail.appendChild(el("p", "detail-body", bodyText(active)));
    const lastRun = active.metadata["last_run"];
    if (lastRun !== undefined) {
      detail.appendChild(el("p", "detail-meta", `last run ${lastRun}`));
    }
    panel.appendChild(detail);
  }
  return panel;
}

export function render(
  data: ViewData,
  state: ViewState,
  handlers: Handlers,
): HTMLElement {
  const view = el("div", "view");
  view.appendChild(renderToolbar(state, handlers));
  const columns = el("div", "columns");
  const highlighted = highlightTargets(data, state);
  columns.appendChild(renderSource(data, state, handlers, highlighted));
  for (const column of renderColumns(data, state, handlers)) {
    columns.appendChild(column);
  }
  columns.appendChild(renderPanel(data, state, handlers));
  view.appendChild(columns);
  return view;
}
