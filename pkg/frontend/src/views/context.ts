import { h } from '../dom.js'
import type { ContextPayload, Dimension } from '../types.js'
import { DIMENSIONS, DIMENSION_LABELS } from '../types.js'

export type ContextFormHandlers = {
  onConfirm: (context: ContextPayload) => void
}

export type ContextFormProps = {
  // null when extraction found nothing; the form becomes manual entry.
  context: ContextPayload | null
  warnings: string[]
}

export function renderContextForm(
  props: ContextFormProps,
  handlers: ContextFormHandlers,
): HTMLElement {
  const manual = props.context === null
  const inputs = new Map<Dimension, HTMLInputElement>()

  const rows = DIMENSIONS.map(dimension => {
    const input = h('input', {
      class: 'context-input',
      type: 'text',
      name: dimension,
      value: props.context?.[dimension] ?? '',
    }) as HTMLInputElement
    inputs.set(dimension, input)
    return h('label', { class: 'context-row' }, [
      h('span', { class: 'context-label' }, DIMENSION_LABELS[dimension]),
      input,
    ])
  })

  const confirm = h('button', { class: 'confirm-button', type: 'submit' },
    'Confirm context')

  const form = h('form', { class: 'context-form' }, [...rows, confirm])
  form.addEventListener('submit', event => {
    event.preventDefault()
    const payload = {} as ContextPayload
    for (const dimension of DIMENSIONS) {
      const value = inputs.get(dimension)!.value.trim()
      payload[dimension] = value === '' ? null : value
    }
    handlers.onConfirm(payload)
  })

  const children: HTMLElement[] = [h('h2', {}, 'Review the design context')]
  if (manual) {
    children.push(h('p', { class: 'manual-note' },
      'Nothing could be read from the screens. Fill in whichever '
      + 'dimensions you know; leave the rest blank.'))
  } else {
    children.push(h('p', { class: 'hint' },
      'These values were read from your screens. Edit anything that is '
      + 'off, then confirm. Blank means the dimension does not apply.'))
  }
  for (const warning of props.warnings) {
    children.push(h('p', { class: 'warning' }, warning))
  }
  children.push(form)
  return h('section', { class: 'pane pane-context' }, children)
}
