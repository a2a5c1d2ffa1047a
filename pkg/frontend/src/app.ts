// Controller: owns the state, talks to the service through the client, and
// swaps in a freshly rendered view after every change.

import { ApiError, Client } from "./api.js";
import type { Annotation, AnnotationKind, Scope, WorkTree } from "./api.js";
import { render } from "./render.js";
import type { Handlers, ViewData } from "./render.js";
import {
  defaultState,
  highlightAnnotation,
  selectAnchor,
  toggleColumn,
  withRules,
  withScope,
} from "./state.js";
import type { ColoringRule, ViewState } from "./state.js";

const SCOPES: Scope[] = ["ancestors", "exact", "descendants", "all"];

export class App {
  private state: ViewState;
  private data: ViewData = { tree: null, annotations: [], panel: null };
  private banner: string | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly client: Client,
  ) {
    this.state = defaultState("");
  }

  async load(workId: string): Promise<void> {
    this.state = defaultState(workId);
    let tree: WorkTree | null = null;
    let annotations: Annotation[] = [];
    try {
      [tree, annotations] = await Promise.all([
        this.client.getWork(workId),
        this.client.listAnnotations({ work: workId }),
      ]);
      this.banner = null;
    } catch (error) {
      if (error instanceof ApiError && error.code === "unknown_work") {
        this.banner = null; // the empty state already says what happened
      } else {
        this.banner = describe(error);
      }
    }
    this.data = { tree, annotations, panel: null };
    this.refresh();
  }

  setColoring(rules: ColoringRule[]): void {
    this.state = withRules(this.state, rules);
    this.refresh();
  }

  private handlers(): Handlers {
    return {
      onWordClick: (anchor) => void this.inspect(anchor),
      onAnnotationSelect: (id) => {
        const next = this.state.highlightedAnnotation === id ? null : id;
        this.state = highlightAnnotation(this.state, next);
        this.refresh();
      },
      onColumnToggle: (kind: AnnotationKind) => {
        this.state = toggleColumn(this.state, kind);
        this.refresh();
      },
      onScopeToggle: () => {
        const index = SCOPES.indexOf(this.state.scope);
        this.state = withScope(this.state, SCOPES[(index + 1) % SCOPES.length]);
        void this.refetchPanel();
      },
    };
  }

  private async inspect(anchor: string): Promise<void> {
    this.state = selectAnchor(this.state, anchor);
    await this.refetchPanel();
  }

  private async refetchPanel(): Promise<void> {
    const anchor = this.state.selectedAnchor;
    if (anchor === null) {
      this.data = { ...this.data, panel: null };
      this.refresh();
      return;
    }
    try {
      const panel = await this.client.annotationsFor(anchor, this.state.scope);
      this.data = { ...this.data, panel };
      this.banner = null;
    } catch (error) {
      this.banner = describe(error);
    }
    this.refresh();
  }

  private refresh(): void {
    const children: HTMLElement[] = [];
    if (this.banner !== null) {
      const note = document.createElement("div");
      note.className = "banner";
      note.textContent = this.banner;
      children.push(note);
    }
    children.push(render(this.data, this.state, this.handlers()));
    this.container.replaceChildren(...children);
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `service error: ${error.message}`;
  return `service unreachable: ${String(error)}`;
}

/** Parse one coloring rule per line, "key=value:color"; bad lines dropped. */
export function parseRules(text: string): ColoringRule[] {
  const rules: ColoringRule[] = [];
  for (const line of text.split("\n")) {
    const match = /^\s*([^=\s]+)=([^:]+):(.+?)\s*$/.exec(line);
    if (match === null) continue;
    rules.push({ key: match[1], value: match[2].trim(), color: match[3] });
  }
  return rules;
}
