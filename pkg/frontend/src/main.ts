import { ApiClient } from "./api.js";
import { ComposerApp } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
const app = new ComposerApp(root, new ApiClient());
void app.init();
