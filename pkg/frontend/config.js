// Where the moderation API lives. Empty string means same origin, which is
// right when the console is served by `dialogue-forge serve --static`.
// Point this elsewhere to review a run served on another host.
window.API_BASE = window.API_BASE || "";
