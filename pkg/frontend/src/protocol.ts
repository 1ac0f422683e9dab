// Wire protocol shared with the server: one JSON object per frame. The
// browser socket carries the same frames plus the UI-only "event" and
// "render" types.

export const PROTOCOL_VERSION = 1;

export interface WireFrame {
    v: number;
    type: string;
    id: string;
    from: string;
    to: string;
    body: string;
    ts: number;
    seq: number;
}

export interface NotificationView {
    id: number;
    sender: string;
    arrived_ms: number;
    preview: string;
}

export interface MessageView {
    id: string;
    sender: string; // "self" for own messages
    recipient: string;
    body: string;
    ts_ms: number;
}

export interface ContactView {
    name: string;
    last_activity_ms: number;
    unread_count: number;
}

export interface InputPanelView {
    mode: "dictation" | "keyboard" | "idle";
    draft: string;
    focus: "voice" | "keyboard" | "send";
}

export interface RenderModelView {
    visible: boolean;
    notification_panel: NotificationView[];
    chat_panel: MessageView[];
    contact_panel: ContactView[];
    input_panel: InputPanelView;
    canvas: [number, number];
}

export interface EffectRecord {
    t: number;
    effect: string;
    data: Record<string, unknown>;
}

// Body of a "render" frame.
export interface RenderPayload {
    t: number;
    render: RenderModelView;
    effects: EffectRecord[];
    opacity: { base: number; boost: number; boosted: string[] };
}

export type SessionEvent = { kind: string } & Record<string, unknown>;

export function encodeFrame(frame: Partial<WireFrame>): string {
    return JSON.stringify({
        v: PROTOCOL_VERSION,
        type: frame.type ?? "",
        id: frame.id ?? "",
        from: frame.from ?? "",
        to: frame.to ?? "",
        body: frame.body ?? "",
        ts: frame.ts ?? 0,
        seq: frame.seq ?? 0,
    });
}

export function decodeFrame(text: string): WireFrame | null {
    let obj: unknown;
    try {
        obj = JSON.parse(text);
    } catch {
        return null;
    }
    if (typeof obj !== "object" || obj === null) {
        return null;
    }
    const o = obj as Record<string, unknown>;
    if (o.v !== PROTOCOL_VERSION || typeof o.type !== "string") {
        return null;
    }
    return {
        v: PROTOCOL_VERSION,
        type: o.type,
        id: typeof o.id === "string" ? o.id : "",
        from: typeof o.from === "string" ? o.from : "",
        to: typeof o.to === "string" ? o.to : "",
        body: typeof o.body === "string" ? o.body : "",
        ts: typeof o.ts === "number" ? o.ts : 0,
        seq: typeof o.seq === "number" ? o.seq : 0,
    };
}

export function eventFrame(payload: Record<string, unknown>): string {
    return encodeFrame({ type: "event", body: JSON.stringify(payload) });
}

export function parseRenderPayload(frame: WireFrame): RenderPayload | null {
    if (frame.type !== "render") {
        return null;
    }
    try {
        return JSON.parse(frame.body) as RenderPayload;
    } catch {
        return null;
    }
}
