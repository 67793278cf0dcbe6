/** Browser entry point: mount the demo onto #app.
 *
 * The service origin comes from the `api` query parameter, defaulting to
 * the page's own origin (e.g. when a static server proxies /v1).
 */

import { mount } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "";
const root = document.getElementById("app");
if (root === null) throw new Error("missing #app container");
mount(root, { baseUrl }).catch((err) => {
  root.textContent = `failed to start demo: ${err}`;
});
