// Typed client for the annotation service. Every request goes through one
// of the documented routes; concurrent identical requests share one fetch.

export interface WorkSummary {
  work: string;
  types: string[];
  leaves: number;
}

export interface TreeNode {
  type: string;
  key: string;
  anchor: string;
  span: number[];
  token?: string;
  children?: TreeNode[];
}

export interface WorkTree extends WorkSummary {
  tree: TreeNode;
}

export interface QueryBody {
  language: string;
  text: string;
  result_count: number;
}

export interface FeatureBody {
  key: string;
  value: string;
}

export interface KeywordBody {
  keyword: string;
}

export interface TopicBody {
  topic_id: string;
  label: string;
  words: { word: string; weight: number }[];
  confidence: number;
}

export type AnnotationKind = "query" | "feature" | "keyword" | "topic";

export interface Annotation {
  id: string;
  kind: AnnotationKind;
  body: QueryBody | FeatureBody | KeywordBody | TopicBody;
  targets: string[];
  metadata: Record<string, string>;
}

export type Scope = "exact" | "ancestors" | "descendants" | "all";

interface Envelope<T> {
  ok: boolean;
  data?: T;
  error?: { code: string; message: string };
}

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class Client {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) =>
      globalThis.fetch(url, init),
  ) {}

  listWorks(): Promise<WorkSummary[]> {
    return this.request<WorkSummary[]>("GET", "/works");
  }

  getWork(workId: string): Promise<WorkTree> {
    return this.request<WorkTree>("GET", `/works/${encodeURIComponent(workId)}`);
  }

  listAnnotations(filter: {
    work?: string;
    kind?: AnnotationKind;
  } = {}): Promise<Annotation[]> {
    const params = new URLSearchParams();
    if (filter.work !== undefined) params.set("work", filter.work);
    if (filter.kind !== undefined) params.set("kind", filter.kind);
    const suffix = params.size > 0 ? `?${params}` : "";
    return this.request<Annotation[]>("GET", `/annotations${suffix}`);
  }

  annotationsFor(anchor: string, scope: Scope): Promise<Annotation[]> {
    const path =
      `/objects/${encodeURIComponent(anchor)}/annotations?scope=${scope}`;
    return this.request<Annotation[]>("GET", path);
  }

  private request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const key = `${method} ${path} ${body === undefined ? "" : JSON.stringify(body)}`;
    const pending = this.inflight.get(key);
    if (pending !== undefined) return pending as Promise<T>;
    const promise = this.send<T>(method, path, body).finally(() => {
      this.inflight.delete(key);
    });
    this.inflight.set(key, promise);
    return promise;
  }

  private async send<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchFn(this.base + path, init);
    const envelope = (await response.json()) as Envelope<T>;
    if (!envelope.ok || envelope.data === undefined) {
      const error = envelope.error ?? { code: "invalid", message: "bad response" };
      throw new ApiError(error.code, error.message, response.status);
    }
    return envelope.data;
  }
}

export function bodyText(annotation: Annotation): string {
  switch (annotation.kind) {
    case "query":
      return (annotation.body as QueryBody).text;
    case "feature": {
      const body = annotation.body as FeatureBody;
      return `${body.key}=${body.value}`;
    }
    case "keyword":
      return (annotation.body as KeywordBody).keyword;
    case "topic": {
      const body = annotation.body as TopicBody;
      return `${body.topic_id}: ${body.label}`;
    }
  }
}
