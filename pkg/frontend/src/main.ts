import { ServiceClient } from "./api.js";
import { SessionController } from "./controller.js";
import { render } from "./ui.js";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? window.location.origin;
  const experiment = params.get("experiment") ?? "digitmat32";
  const seedParam = params.get("seed");

  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");

  const controller = new SessionController(new ServiceClient(server));
  try {
    await controller.start(experiment, seedParam === null ? undefined : Number(seedParam));
  } catch (err) {
    root.textContent = `Could not start a session: ${err instanceof Error ? err.message : err}`;
    return;
  }
  render(controller, root);
}

void boot();
