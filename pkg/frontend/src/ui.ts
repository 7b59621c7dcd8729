/** DOM rendering for the experiment runner: one active trial per page,
 * no per-trial time limit, no accuracy feedback mid-session. */

import { SessionInfo } from "./api.js";
import { SessionController, View } from "./controller.js";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function progress(view: View): HTMLElement {
  return el("div", "progress", `Problem ${view.trial + 1} of ${view.nTrials}`);
}

function renderMatrixGrid(display: string[][]): HTMLElement {
  const table = el("table", "matrix-grid");
  for (const row of display) {
    const tr = el("tr");
    for (const cell of row) {
      tr.appendChild(el("td", "matrix-cell", cell));
    }
    table.appendChild(tr);
  }
  return table;
}

function renderLetterDisplay(lines: string[]): HTMLElement {
  const box = el("div", "letter-display");
  for (const line of lines) box.appendChild(el("div", "letter-line", line));
  return box;
}

function freeResponseForm(
  controller: SessionController,
  root: HTMLElement,
  placeholder: string,
): HTMLElement {
  const form = el("form", "free-form") as HTMLFormElement;
  const input = el("input", "free-input") as HTMLInputElement;
  input.type = "text";
  input.placeholder = placeholder;
  input.autocomplete = "off";
  const button = el("button", "submit-button", "Submit answer") as HTMLButtonElement;
  button.type = "submit";
  form.append(input, button);
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!input.value.trim()) return;
    button.disabled = true;
    await controller.submitFree(input.value.trim());
    render(controller, root);
  });
  return form;
}

function choiceButtons(controller: SessionController, root: HTMLElement, choices: string[]): HTMLElement {
  const box = el("div", "choices");
  choices.forEach((choice, index) => {
    const button = el("button", "choice-button", `[${choice}]`) as HTMLButtonElement;
    button.type = "button";
    button.addEventListener("click", async () => {
      box.querySelectorAll("button").forEach((b) => ((b as HTMLButtonElement).disabled = true));
      await controller.submitChoice(index);
      render(controller, root);
    });
    box.appendChild(button);
  });
  return box;
}

function storyPanel(controller: SessionController, root: HTMLElement, view: View): HTMLElement {
  const story = view.story!;
  const box = el("div", "story-trial");
  box.appendChild(el("h3", undefined, "Story 1"));
  box.appendChild(el("p", "story-text", story.story1));
  box.appendChild(el("h3", undefined, "Story A"));
  box.appendChild(el("p", "story-text", story.storyA));
  box.appendChild(el("h3", undefined, "Story B"));
  box.appendChild(el("p", "story-text", story.storyB));
  box.appendChild(
    el("p", "story-question", "Which of Story A and Story B is a better analogy to Story 1?"),
  );
  const buttons = el("div", "choices");
  const labels: Array<["A" | "B" | "Both", string]> = [
    ["A", "Story A"],
    ["B", "Story B"],
    ["Both", "Both are equally analogous"],
  ];
  for (const [value, label] of labels) {
    const button = el("button", "choice-button", label) as HTMLButtonElement;
    button.type = "button";
    button.addEventListener("click", async () => {
      buttons.querySelectorAll("button").forEach((b) => ((b as HTMLButtonElement).disabled = true));
      await controller.submitStoryChoice(value);
      render(controller, root);
    });
    buttons.appendChild(button);
  }
  box.appendChild(buttons);
  return box;
}

function instructionsScreen(
  controller: SessionController,
  root: HTMLElement,
  session: SessionInfo,
): HTMLElement {
  const box = el("div", "instructions");
  box.appendChild(el("h2", undefined, "Instructions"));
  box.appendChild(el("p", undefined, session.instructions));
  const example = session.example;
  if (example) {
    box.appendChild(el("h3", undefined, "Example"));
    if (Array.isArray(example.display[0])) {
      box.appendChild(renderMatrixGrid(example.display as string[][]));
    } else {
      box.appendChild(renderLetterDisplay(example.display as string[]));
    }
    box.appendChild(el("p", "example-note", `Answer: ${example.answer}`));
    if (example.note) box.appendChild(el("p", "example-note", example.note));
  }
  const start = el("button", "submit-button", "Start") as HTMLButtonElement;
  start.type = "button";
  start.addEventListener("click", async () => {
    start.disabled = true;
    await controller.begin();
    render(controller, root);
  });
  box.appendChild(start);
  return box;
}

export function render(controller: SessionController, root: HTMLElement): void {
  const view = controller.view;
  root.replaceChildren();

  if (view.error) {
    const banner = el("div", "error-banner", `Something went wrong (${view.error}).`);
    const retry = el("button", "retry-button", "Retry") as HTMLButtonElement;
    retry.type = "button";
    retry.addEventListener("click", async () => {
      await controller.refresh();
      controller.view.error = undefined;
      render(controller, root);
    });
    banner.appendChild(retry);
    root.appendChild(banner);
  }

  switch (view.phase) {
    case "instructions":
      root.appendChild(instructionsScreen(controller, root, controller.session!));
      return;
    case "done": {
      const complete = el("div", "complete");
      complete.appendChild(el("h2", undefined, "Session complete"));
      complete.appendChild(el("p", undefined, "Thank you for participating. You may close this tab."));
      root.appendChild(complete);
      return;
    }
    case "awaiting_free": {
      root.appendChild(progress(view));
      if (view.kind === "digitmat") {
        root.appendChild(renderMatrixGrid(view.display as string[][]));
        root.appendChild(
          el("p", "task-hint", "Type the digits for the missing cell, separated by spaces."),
        );
        root.appendChild(freeResponseForm(controller, root, "e.g. 4 9"));
      } else {
        root.appendChild(renderLetterDisplay(view.display as string[]));
        root.appendChild(
          el("p", "task-hint", "Type the string that completes the pattern, tokens separated by spaces."),
        );
        root.appendChild(freeResponseForm(controller, root, "e.g. i j k m"));
      }
      return;
    }
    case "awaiting_choice": {
      root.appendChild(progress(view));
      root.appendChild(renderMatrixGrid(view.display as string[][]));
      root.appendChild(el("p", "task-hint", "Now select the matching answer."));
      root.appendChild(choiceButtons(controller, root, view.choices ?? []));
      return;
    }
    case "awaiting_story_choice": {
      root.appendChild(progress(view));
      root.appendChild(storyPanel(controller, root, view));
      return;
    }
    default:
      root.appendChild(el("p", undefined, "Loading..."));
  }
}
