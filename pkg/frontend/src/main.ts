import { App } from './app.js'

// Same-origin by default; a host page can point the panel elsewhere by
// setting window.REFINE_API before this script loads.
const baseUrl = (window as { REFINE_API?: string }).REFINE_API ?? ''

const root = document.getElementById('app')
if (root === null) throw new Error('missing #app container')

const app = new App(root, { baseUrl })
void app.start()
