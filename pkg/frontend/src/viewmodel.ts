// The view model mirrors the engine's render model exactly (the page keeps
// no conversation state of its own) and adds the per-panel opacity values
// derived from the active boosts.

import { MessageView, RenderPayload, RenderModelView } from "./protocol.js";

export interface PanelOpacity {
    notifications: number;
    chat: number;
    contacts: Record<string, number>; // per contact row
    contactsPanel: number;
}

export interface ViewModel {
    connected: boolean;
    render: RenderModelView;
    opacity: PanelOpacity;
    beep: boolean; // a beep effect arrived with this update
}

export const HIDDEN_RENDER: RenderModelView = {
    visible: false,
    notification_panel: [],
    chat_panel: [],
    contact_panel: [],
    input_panel: { mode: "idle", draft: "", focus: "voice" },
    canvas: [2048, 1080],
};

export function chatPeer(chat: MessageView[]): string | null {
    for (const m of chat) {
        if (m.sender !== "self") {
            return m.sender;
        }
    }
    // an all-own-messages window still names the peer in recipient
    return chat.length > 0 ? chat[chat.length - 1].recipient : null;
}

export function fromRenderPayload(payload: RenderPayload): ViewModel {
    const { base, boost, boosted } = payload.opacity;
    const boostedSet = new Set(boosted);
    const peer = chatPeer(payload.render.chat_panel);
    const contacts: Record<string, number> = {};
    let anyContactBoosted = false;
    for (const c of payload.render.contact_panel) {
        const hot = boostedSet.has(c.name);
        contacts[c.name] = hot ? boost : base;
        anyContactBoosted = anyContactBoosted || hot;
    }
    const notifBoosted = payload.render.notification_panel.some((n) =>
        boostedSet.has(n.sender),
    );
    return {
        connected: true,
        render: payload.render,
        opacity: {
            notifications: notifBoosted ? boost : base,
            chat: peer !== null && boostedSet.has(peer) ? boost : base,
            contacts,
            contactsPanel: anyContactBoosted ? boost : base,
        },
        beep: payload.effects.some((e) => e.effect === "beep"),
    };
}

export function disconnectedViewModel(): ViewModel {
    return {
        connected: false,
        render: HIDDEN_RENDER,
        opacity: { notifications: 0.7, chat: 0.7, contacts: {}, contactsPanel: 0.7 },
        beep: false,
    };
}
