// Entry point: pick a work (from ?work= or the first one listed), mount the
// app, and wire the coloring-rule form.

import { App, parseRules } from "./app.js";
import { Client } from "./api.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (root === null) return;

  const client = new Client();
  const app = new App(root, client);

  const input = document.getElementById("rules") as HTMLTextAreaElement | null;
  const apply = document.getElementById("apply-rules");
  if (input !== null && apply !== null) {
    apply.addEventListener("click", () => app.setColoring(parseRules(input.value)));
  }

  const requested = new URLSearchParams(window.location.search).get("work");
  if (requested !== null) {
    await app.load(requested);
    return;
  }
  try {
    const works = await client.listWorks();
    await app.load(works.length > 0 ? works[0].work : "");
  } catch (error) {
    root.textContent = `service unreachable: ${String(error)}`;
  }
}

void boot();
