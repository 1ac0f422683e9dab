// Paints the view model onto the overlay: four absolutely positioned
// panels over the passthrough background, scaled from the virtual canvas
// to the viewport. Panel alpha follows the opacity values in the view
// model (base 0.70, boosted 0.95 while a new message is fresh).

import { LAYOUT, PanelName, canvasScale, toViewport } from "./layout.js";
import { ViewModel } from "./viewmodel.js";

export interface OverlayElements {
    root: HTMLElement;
    notifications: HTMLElement;
    chat: HTMLElement;
    contacts: HTMLElement;
    input: HTMLElement;
    banner: HTMLElement;
    keyboard: HTMLElement;
}

function panelDiv(doc: Document, id: string, cls: string): HTMLElement {
    const el = doc.createElement("div");
    el.id = id;
    el.className = `panel ${cls}`;
    return el;
}

export function buildOverlay(doc: Document, root: HTMLElement): OverlayElements {
    const els: OverlayElements = {
        root,
        notifications: panelDiv(doc, "panel-notifications", "notifications"),
        chat: panelDiv(doc, "panel-chat", "chat"),
        contacts: panelDiv(doc, "panel-contacts", "contacts"),
        input: panelDiv(doc, "panel-input", "input"),
        banner: panelDiv(doc, "banner", "banner"),
        keyboard: panelDiv(doc, "virtual-keyboard", "keyboard"),
    };
    for (const el of [els.notifications, els.chat, els.contacts, els.input,
                      els.keyboard, els.banner]) {
        root.appendChild(el);
    }
    els.banner.textContent = "disconnected - inputs disabled";
    els.banner.style.display = "none";
    // static content of the virtual keyboard: a staging line committed as
    // one transcript chunk per Enter
    const hint = doc.createElement("div");
    hint.className = "kb-hint";
    hint.textContent = "virtual keyboard: type, Enter commits to the draft";
    const line = doc.createElement("input");
    line.id = "kb-line";
    line.setAttribute("type", "text");
    els.keyboard.appendChild(hint);
    els.keyboard.appendChild(line);
    return els;
}

function place(el: HTMLElement, panel: PanelName, scale: number): void {
    const rect = toViewport(LAYOUT[panel], scale);
    el.style.position = "absolute";
    el.style.left = `${rect.x}px`;
    el.style.top = `${rect.y}px`;
    el.style.width = `${rect.w}px`;
    el.style.height = `${rect.h}px`;
}

function clear(el: HTMLElement): void {
    while (el.firstChild !== null) {
        el.removeChild(el.firstChild);
    }
}

export function renderOverlay(
    vm: ViewModel,
    els: OverlayElements,
    viewportW: number,
    viewportH: number,
): void {
    const doc = els.root.ownerDocument;
    const scale = canvasScale(viewportW, viewportH);
    els.banner.style.display = vm.connected ? "none" : "block";

    const panels: [HTMLElement, PanelName][] = [
        [els.notifications, "notifications"],
        [els.chat, "chat"],
        [els.contacts, "contacts"],
        [els.input, "input"],
    ];
    for (const [el, name] of panels) {
        place(el, name, scale);
        el.style.display = vm.render.visible ? "block" : "none";
        clear(el);
    }
    place(els.keyboard, "input", scale);
    els.keyboard.style.top = `${Math.round((LAYOUT.input.y - 260) * scale)}px`;
    els.keyboard.style.display =
        vm.render.visible && vm.render.input_panel.mode === "keyboard"
            ? "block"
            : "none";
    if (!vm.render.visible) {
        return;
    }

    // notifications: sender and arrival time, newest on top
    els.notifications.style.opacity = String(vm.opacity.notifications);
    for (const n of vm.render.notification_panel) {
        const item = doc.createElement("div");
        item.className = "notification";
        item.setAttribute("data-target", "notification");
        item.setAttribute("data-name", String(n.id));
        const when = formatTime(n.arrived_ms);
        item.textContent = `${n.sender} · ${when} — ${n.preview}`;
        els.notifications.appendChild(item);
    }

    // chat: up to three bubbles, chronological
    els.chat.style.opacity = String(vm.opacity.chat);
    for (const m of vm.render.chat_panel) {
        const bubble = doc.createElement("div");
        bubble.className = m.sender === "self" ? "bubble own" : "bubble";
        bubble.textContent = m.body;
        els.chat.appendChild(bubble);
    }

    // contacts: recency ordered window with unread badges
    els.contacts.style.opacity = String(vm.opacity.contactsPanel);
    for (const c of vm.render.contact_panel) {
        const row = doc.createElement("div");
        row.className = "contact";
        row.setAttribute("data-target", "contact");
        row.setAttribute("data-name", c.name);
        row.style.opacity = String(vm.opacity.contacts[c.name] ?? 0.7);
        row.textContent = c.unread_count > 0 ? `${c.name} (${c.unread_count})` : c.name;
        els.contacts.appendChild(row);
    }

    // input panel: draft line plus the three mode buttons
    els.input.style.opacity = String(vm.opacity.chat);
    const draft = doc.createElement("div");
    draft.className =
        vm.render.input_panel.mode === "dictation" ? "draft dictating" : "draft";
    draft.textContent = vm.render.input_panel.draft || " ";
    els.input.appendChild(draft);
    for (const [target, label] of [
        ["voice_button", "voice"],
        ["keyboard_button", "keyboard"],
        ["send_button", "send"],
    ] as const) {
        const button = doc.createElement("button");
        button.setAttribute("data-target", target);
        button.className =
            vm.render.input_panel.focus === label ? "mode focused" : "mode";
        button.textContent = label;
        els.input.appendChild(button);
    }
}

function formatTime(ms: number): string {
    const d = new Date(ms);
    const hh = String(d.getHours()).padStart(2, "0");
    const mm = String(d.getMinutes()).padStart(2, "0");
    return `${hh}:${mm}`;
}

// Beep: short sine blip plus a visual flash; both are best-effort so the
// overlay also works in silent/headless environments.
export function beep(doc: Document): void {
    const w = doc.defaultView as any;
    try {
        const Ctx = w?.AudioContext ?? w?.webkitAudioContext;
        if (Ctx) {
            const ctx = new Ctx();
            const osc = ctx.createOscillator();
            const gain = ctx.createGain();
            osc.frequency.value = 880;
            gain.gain.value = 0.08;
            osc.connect(gain);
            gain.connect(ctx.destination);
            osc.start();
            osc.stop(ctx.currentTime + 0.12);
        }
    } catch {
        // no audio in this environment
    }
    const root = doc.getElementById("overlay");
    if (root !== null) {
        root.classList.add("flash");
        setTimeout(() => root.classList.remove("flash"), 180);
    }
}
