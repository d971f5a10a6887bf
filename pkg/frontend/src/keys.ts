/** Keyboard shortcuts for the review loop.
 *
 * Outside the edit box: A accepts, R rejects, E opens the transcript for
 * editing, space toggles playback. While editing, only Enter (save and
 * accept) and Escape (discard the edit) are shortcuts; every other key
 * types into the textarea.
 */

export type Action =
  | "accept"
  | "reject"
  | "edit"
  | "submit-edit"
  | "cancel-edit"
  | "toggle-play"
  | "none";

export function keyAction(key: string, editing: boolean): Action {
  if (editing) {
    if (key === "Enter") return "submit-edit";
    if (key === "Escape") return "cancel-edit";
    return "none";
  }
  switch (key) {
    case "a":
    case "A":
      return "accept";
    case "r":
    case "R":
      return "reject";
    case "e":
    case "E":
      return "edit";
    case " ":
      return "toggle-play";
    default:
      return "none";
  }
}
