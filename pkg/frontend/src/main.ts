import { mount } from "./app.js";

const root = document.getElementById("app");
if (root) {
  mount(root, "");
}
