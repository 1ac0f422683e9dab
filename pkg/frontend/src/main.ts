// Page bootstrap: connect to the session socket, bind inputs, paint
// renders. Query parameters: ?host=..&port=.. override the socket target,
// ?name=.. picks the session name.

import { InputBinder } from "./input.js";
import { beep, buildOverlay, renderOverlay } from "./render.js";
import { SessionClient, sessionUrl } from "./session.js";
import { disconnectedViewModel, fromRenderPayload } from "./viewmodel.js";

function param(name: string, fallback: string): string {
    return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

document.addEventListener("DOMContentLoaded", () => {
    const root = document.getElementById("overlay") as HTMLElement;
    const utteranceBox = document.getElementById("utterance") as HTMLInputElement;
    const els = buildOverlay(document, root);
    const keyboardLine = document.getElementById("kb-line") as HTMLInputElement;

    const host = param("host", window.location.hostname || "127.0.0.1");
    const port = Number(param("port", "7871"));
    const name = param("name", "self");

    let vm = disconnectedViewModel();
    const paint = () =>
        renderOverlay(vm, els, window.innerWidth, window.innerHeight);

    const client = new SessionClient(sessionUrl(host, port, name), {
        onRender: (payload) => {
            vm = fromRenderPayload(payload);
            if (vm.beep) {
                beep(document);
            }
            paint();
        },
        onStatus: (connected) => {
            binder.enabled = connected;
            if (!connected) {
                vm = disconnectedViewModel();
                paint();
            }
        },
        onError: (code) => console.warn("session error:", code),
    });

    const binder = new InputBinder((payload) => client.sendEvent(payload));
    binder.bindTo(document, root, utteranceBox);
    binder.startTicks();

    // the virtual keyboard line commits staged text as one transcript chunk
    keyboardLine.addEventListener("keydown", (ev) => {
        if (ev.key === "Enter") {
            binder.commitKeyboardText(keyboardLine.value);
            keyboardLine.value = "";
            ev.stopPropagation();
        }
    });

    window.addEventListener("resize", paint);
    client.connect();
    paint();
});
