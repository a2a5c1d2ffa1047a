// Wire-exact service payloads for the two fixture works, captured from a
// live service, plus a scripted fetch stand-in.

import type { Annotation, WorkTree } from "../src/api.js";

export const V1W3 = "W1:book/B/chapter/1/verse/1/word/3";
export const V2W2 = "W1:book/B/chapter/1/verse/2/word/2";
export const VERSE1 = "W1:book/B/chapter/1/verse/1";
export const VERSE2 = "W1:book/B/chapter/1/verse/2";

export const W1_TREE: WorkTree = {
  work: "W1",
  types: ["book", "chapter", "verse", "word"],
  leaves: 6,
  tree: {
    type: "book",
    key: "B",
    anchor: "W1:book/B",
    span: [0, 5],
    children: [
      {
        type: "chapter",
        key: "1",
        anchor: "W1:book/B/chapter/1",
        span: [0, 5],
        children: [
          {
            type: "verse",
            key: "1",
            anchor: VERSE1,
            span: [0, 2],
            children: [
              {
                type: "word",
                key: "1",
                anchor: "W1:book/B/chapter/1/verse/1/word/1",
                span: [0, 0],
                token: "In",
              },
              {
                type: "word",
                key: "2",
                anchor: "W1:book/B/chapter/1/verse/1/word/2",
                span: [1, 1],
                token: "beginning",
              },
              { type: "word", key: "3", anchor: V1W3, span: [2, 2], token: "created" },
            ],
          },
          {
            type: "verse",
            key: "2",
            anchor: VERSE2,
            span: [3, 5],
            children: [
              {
                type: "word",
                key: "1",
                anchor: "W1:book/B/chapter/1/verse/2/word/1",
                span: [3, 3],
                token: "earth",
              },
              { type: "word", key: "2", anchor: V2W2, span: [4, 4], token: "was" },
              {
                type: "word",
                key: "3",
                anchor: "W1:book/B/chapter/1/verse/2/word/3",
                span: [5, 5],
                token: "void",
              },
            ],
          },
        ],
      },
    ],
  },
};

export const HUG_TREE: WorkTree = {
  work: "HUG",
  types: ["collection", "letter", "word"],
  leaves: 7,
  tree: {
    type: "collection",
    key: "C",
    anchor: "HUG:collection/C",
    span: [0, 6],
    children: [
      {
        type: "letter",
        key: "L1",
        anchor: "HUG:collection/C/letter/L1",
        span: [0, 2],
        children: [
          { type: "word", key: "1", anchor: "HUG:collection/C/letter/L1/word/1", span: [0, 0], token: "lens" },
          { type: "word", key: "2", anchor: "HUG:collection/C/letter/L1/word/2", span: [1, 1], token: "grinding" },
          { type: "word", key: "3", anchor: "HUG:collection/C/letter/L1/word/3", span: [2, 2], token: "notes" },
        ],
      },
      {
        type: "letter",
        key: "L2",
        anchor: "HUG:collection/C/letter/L2",
        span: [3, 4],
        children: [
          { type: "word", key: "1", anchor: "HUG:collection/C/letter/L2/word/1", span: [3, 3], token: "refraction" },
          { type: "word", key: "2", anchor: "HUG:collection/C/letter/L2/word/2", span: [4, 4], token: "telescope" },
        ],
      },
      {
        type: "letter",
        key: "L3",
        anchor: "HUG:collection/C/letter/L3",
        span: [5, 6],
        children: [
          { type: "word", key: "1", anchor: "HUG:collection/C/letter/L3/word/1", span: [5, 5], token: "dioptrics" },
          { type: "word", key: "2", anchor: "HUG:collection/C/letter/L3/word/2", span: [6, 6], token: "treatise" },
        ],
      },
    ],
  },
};

const QUERY_ANN: Annotation = {
  id: "1",
  kind: "query",
  body: { language: "tql", text: "[verse [word pos=verb]]", result_count: 2 },
  targets: [VERSE1, V1W3, VERSE2, V2W2],
  metadata: { author: "eep", project: "qfa", last_run: "2012-10-28T00:00:00Z" },
};

const POS_VERB_ANN: Annotation = {
  id: "2",
  kind: "feature",
  body: { key: "pos", value: "verb" },
  targets: [V1W3, V2W2],
  metadata: { author: "eep" },
};

export const W1_ANNS: Annotation[] = [QUERY_ANN, POS_VERB_ANN];

export const HUG_ANNS: Annotation[] = [
  {
    id: "3",
    kind: "keyword",
    body: { keyword: "dioptrics" },
    targets: ["HUG:collection/C/letter/L1", "HUG:collection/C/letter/L3"],
    metadata: { author: "dirk" },
  },
  {
    id: "4",
    kind: "topic",
    body: {
      topic_id: "T7",
      label: "optics",
      words: [
        { word: "lens", weight: 0.4 },
        { word: "refraction", weight: 0.35 },
        { word: "telescope", weight: 0.25 },
      ],
      confidence: 0.82,
    },
    targets: ["HUG:collection/C/letter/L2"],
    metadata: {},
  },
];

/** Reverse lookup for v1w3 at scope=ancestors against the fixture store. */
export const V1W3_ANCESTOR_ANNS: Annotation[] = [POS_VERB_ANN, QUERY_ANN];

/** The fixture store extended with frozen tense extensions. */
export const W1_ANNS_TENSE: Annotation[] = [
  QUERY_ANN,
  POS_VERB_ANN,
  {
    id: "5",
    kind: "feature",
    body: { key: "tense", value: "imperfect" },
    targets: [V2W2],
    metadata: { author: "eep" },
  },
  {
    id: "6",
    kind: "feature",
    body: { key: "tense", value: "perfect" },
    targets: [V1W3],
    metadata: { author: "eep" },
  },
];

export interface FakeService {
  fetch: (url: string, init?: RequestInit) => Promise<Response>;
  calls: string[];
}

/** A scripted error response, mirroring the service's error envelope. */
export class RouteError {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly message: string,
  ) {}
}

/** Script a fetch from a map of "METHOD url" to response data; unknown
    requests get the service's unknown_route envelope. */
export function fakeService(routes: Record<string, unknown>): FakeService {
  const calls: string[] = [];
  const respond = (status: number, payload: unknown): Response =>
    ({ status, json: async () => payload }) as unknown as Response;

  const fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    calls.push(`${method} ${url}`);
    const data = routes[`${method} ${url}`];
    if (data instanceof RouteError) {
      return respond(data.status, {
        ok: false,
        error: { code: data.code, message: data.message },
      });
    }
    if (!(`${method} ${url}` in routes)) {
      return respond(404, {
        ok: false,
        error: { code: "unknown_route", message: `no such route: ${method} ${url}` },
      });
    }
    return respond(200, { ok: true, data });
  };
  return { fetch, calls };
}

export function encoded(anchor: string): string {
  return encodeURIComponent(anchor);
}
