// Tiny element builder; enough for a panel of this size.

export type Child = Node | string

export function h(
  tag: string,
  attrs: Record<string, string | boolean | EventListener> = {},
  children: Child[] | string = [],
): HTMLElement {
  const el = document.createElement(tag)
  for (const [name, value] of Object.entries(attrs)) {
    if (typeof value === 'function') {
      el.addEventListener(name.replace(/^on/, '').toLowerCase(), value)
    } else if (typeof value === 'boolean') {
      if (value) el.setAttribute(name, '')
    } else {
      el.setAttribute(name, value)
    }
  }
  const list = typeof children === 'string' ? [children] : children
  for (const child of list) {
    el.append(child instanceof Node ? child : document.createTextNode(child))
  }
  return el
}

export function clear(el: Element): void {
  el.replaceChildren()
}
