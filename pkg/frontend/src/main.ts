import { GatewayClient } from "./api.js";
import { createApp } from "./app.js";

// API base URL is the console's only configuration knob.
const baseUrl =
  document.querySelector<HTMLMetaElement>('meta[name="sowgen-api-base"]')?.content ?? "";

const app = createApp({ client: new GatewayClient(baseUrl) });
document.getElementById("app")?.append(app.root);
