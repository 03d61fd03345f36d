import { App } from "./app";
import "./style.css";

const root = document.getElementById("app");
if (root) {
  const app = new App(root);
  void app.boot();
}
