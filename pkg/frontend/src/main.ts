// Browser entry point: one WebSocket to the gateway, view-model in, DOM out.

import { ConsoleClient } from "./client.js";
import {
  controlOptions,
  renderBanner,
  renderControls,
  renderFeed,
  renderInbox,
  renderStatusBar,
  renderWorld,
  FEEDBACK_TEMPLATES,
} from "./render.js";
import type { ConsoleView } from "./state.js";

function byId(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (element === null) {
    throw new Error(`missing #${id}`);
  }
  return element;
}

const gatewayUrl = `ws://${location.host}/ws`;

const client = new ConsoleClient(
  () => new WebSocket(gatewayUrl),
  (view) => render(view),
);

function render(view: ConsoleView): void {
  byId("status-bar").innerHTML = renderStatusBar(view);
  byId("banner").innerHTML = renderBanner(view);
  byId("world").innerHTML = renderWorld(view);
  byId("inbox").innerHTML = renderInbox(view);
  byId("controls").innerHTML = renderControls(view);
  wireControls(view);
}

function wireControls(view: ConsoleView): void {
  const options = controlOptions(view);
  byId("controls")
    .querySelectorAll<HTMLButtonElement>("button.teleop")
    .forEach((button) => {
      button.onclick = () => {
        const option = options[Number(button.dataset.index)];
        if (option) {
          client.sendTeleop(option.kind, option.robot, option.target);
        }
      };
    });
  byId("controls")
    .querySelectorAll<HTMLButtonElement>("button.template")
    .forEach((button) => {
      button.onclick = () => {
        const text = FEEDBACK_TEMPLATES[Number(button.dataset.template)] ?? "";
        const area = document.getElementById("feedback-text") as HTMLTextAreaElement | null;
        if (area) {
          area.value = text;
        }
      };
    });
  const feedbackButton = document.getElementById("send-feedback");
  if (feedbackButton) {
    feedbackButton.onclick = () => {
      const area = document.getElementById("feedback-text") as HTMLTextAreaElement | null;
      client.sendFeedback(area?.value || "done");
    };
  }
  const declineButton = document.getElementById("send-decline");
  if (declineButton) {
    declineButton.onclick = () => {
      const area = document.getElementById("feedback-text") as HTMLTextAreaElement | null;
      client.sendDecline(area?.value || "declined");
    };
  }
}

byId("give-up").onclick = () => {
  if (confirm("Give up the trial?")) {
    client.sendGiveUp();
  }
};

// feed panel refreshes with every view change too
const feedTimer = setInterval(() => {
  byId("feed").innerHTML = renderFeed(client.view);
}, 500);
window.addEventListener("beforeunload", () => clearInterval(feedTimer));

client.connect();
