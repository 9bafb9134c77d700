import { DashboardApp } from "./app.js";
import { WsLike } from "./live.js";

const app = new DashboardApp(document.getElementById("app")!, {
  fetchImpl: (url, init) => fetch(url, init),
  wsFactory: (url) => {
    const scheme = location.protocol === "https:" ? "wss" : "ws";
    return new WebSocket(`${scheme}://${location.host}${url}`) as unknown as WsLike;
  },
});

app.mount();
void app.start();

const raf = () => {
  app.renderTick();
  requestAnimationFrame(raf);
};
requestAnimationFrame(raf);
